"""Scale- and rotation-covariant hierarchical quadrature features.

Oriented quasi quadrature measures over Gaussian derivatives, stacked into
a small cascade whose layer maps transform predictably under rescaling and
quarter-turn rotation, plus a mean-reduced texture descriptor and a
nearest-neighbour benchmark harness on top.
"""

from .cascade import (LayerMaps, NetworkConfig, build_network, config_hash,
                      dump_maps, pool_orientations)
from .covariance import (CovarianceReport, LayerDeviation,
                         check_rotation_covariance, check_scale_covariance,
                         report_to_json)
from .descriptor import (FEATURES, Descriptor, LabeledDataset,
                         compute_descriptor, descriptor_length,
                         ingest_dataset, layout_entries, load_descriptor,
                         make_splits, nnc_classify, run_benchmark,
                         save_descriptor, transition_band)
from .imagecore import (ColourImage, ImagePlane, load_image, resample,
                        rgb_to_luv, rotate90, save_pgm)
from .oriented import (OrientationSet, directional_kernel, oriented_qq,
                       oriented_qq_image, oriented_qq_rotated, post_smooth,
                       quadrature_of_normalized, normalized_steered, steer)
from .quad1d import (C_DEFAULT, QuadratureParams, argmax_over_scale,
                     blob_response_discrete, optimal_C, optimal_C_numeric,
                     quasi_quadrature_1d, quasi_quadrature_signal,
                     scale_response_curve)
from .scalespace import (SIGMA_MIN, GaussianKernel, ScaleSpaceStack,
                         StackEntry, build_stack, derivatives, make_kernel,
                         normalize_derivative, smooth)

__version__ = '0.1.0'

__all__ = [
    'C_DEFAULT', 'ColourImage', 'CovarianceReport', 'Descriptor',
    'FEATURES', 'GaussianKernel', 'ImagePlane', 'LabeledDataset',
    'LayerDeviation', 'LayerMaps', 'NetworkConfig', 'OrientationSet',
    'QuadratureParams', 'SIGMA_MIN', 'ScaleSpaceStack', 'StackEntry',
    'argmax_over_scale', 'blob_response_discrete', 'build_network',
    'build_stack', 'check_rotation_covariance', 'check_scale_covariance',
    'compute_descriptor', 'config_hash', 'derivatives', 'descriptor_length',
    'directional_kernel', 'dump_maps', 'ingest_dataset', 'layout_entries',
    'load_descriptor', 'load_image', 'make_kernel', 'make_splits',
    'nnc_classify', 'normalize_derivative', 'normalized_steered',
    'optimal_C', 'optimal_C_numeric', 'oriented_qq', 'oriented_qq_image',
    'oriented_qq_rotated', 'pool_orientations', 'post_smooth',
    'quadrature_of_normalized', 'quasi_quadrature_1d',
    'quasi_quadrature_signal', 'report_to_json', 'resample', 'rgb_to_luv',
    'rotate90', 'run_benchmark', 'save_descriptor', 'save_pgm',
    'scale_response_curve', 'smooth', 'steer', 'transition_band',
    '__version__',
]
