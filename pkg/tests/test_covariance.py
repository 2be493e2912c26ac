"""Covariance report harness behaviour on controlled inputs."""

import numpy as np
import pytest

from quasiquadnet import (NetworkConfig, check_rotation_covariance,
                          check_scale_covariance, report_to_json)

CFG = NetworkConfig(num_orientations=4, max_tuple_len=2, num_layers=2,
                    base_sigmas=(1.0, 2.0))


def test_scale_identity_factor_is_machine_zero(texture_a):
    img = texture_a[:96, :96]
    report = check_scale_covariance(img, CFG, factor=1.0, tol=1e-12)
    assert report.passed
    for d in report.layers:
        assert d.max_deviation < 1e-12


def test_scale_constant_image_is_exactly_zero():
    img = np.full((128, 128), 0.4)
    report = check_scale_covariance(img, CFG, factor=2.0, tol=1e-12)
    assert report.passed
    for d in report.layers:
        if d.layer >= 1:  # zero maps compare exactly
            assert d.max_deviation == 0.0
        else:  # the smoothed constant itself is equal to rounding
            assert d.max_deviation < 1e-12


def test_scale_report_structure(texture_a):
    img = texture_a[:160, :160]
    report = check_scale_covariance(img, CFG, factor=2.0, tol=0.05)
    assert report.transform == 'scale:2'
    assert len(report.layers) == len(CFG.base_sigmas) * (CFG.num_layers + 1)
    for d in report.layers:
        assert d.n_channels >= 1 and d.band >= 1
    blob = report_to_json(report)
    assert blob['passed'] == report.passed
    assert len(blob['layers']) == len(report.layers)
    assert {'base_sigma', 'layer', 'mean_deviation', 'max_deviation',
            'band', 'n_channels'} <= set(blob['layers'][0])


def test_scale_covariance_holds_on_texture(texture_b):
    cfg = NetworkConfig(num_orientations=4, num_layers=3,
                        base_sigmas=(2.0,))
    report = check_scale_covariance(texture_b, cfg, factor=2.0, tol=0.05)
    assert report.passed, [d.mean_deviation for d in report.layers]


def test_scale_covariance_gamma_compensation(texture_b):
    # at gamma = 0.25 the layers differ by 2^(k/4) before compensation
    # (41% at the deepest layer here), so passing proves the gain is right
    cfg = NetworkConfig(num_orientations=4, num_layers=2,
                        base_sigmas=(2.0,), gamma=0.25)
    report = check_scale_covariance(texture_b, cfg, factor=2.0, tol=0.05)
    assert report.passed, [d.mean_deviation for d in report.layers]


def test_scale_covariance_input_validation(texture_a):
    with pytest.raises(ValueError, match='sigma floor'):
        check_scale_covariance(texture_a, CFG, factor=4.0)
    with pytest.raises(ValueError):
        check_scale_covariance(texture_a, CFG, factor=0.0)
    with pytest.raises(ValueError):
        check_scale_covariance(np.zeros((4, 4, 3)), CFG)


def test_scale_covariance_can_fail(texture_a):
    report = check_scale_covariance(texture_a[:128, :128], CFG, factor=2.0,
                                    tol=1e-9)
    assert not report.passed


def test_rotation_covariance_machine_precision(texture_b):
    img = texture_b[:96, :64]  # rectangle: shapes must swap cleanly
    report = check_rotation_covariance(img, CFG, quarter_turns=1, tol=1e-9)
    assert report.passed
    for d in report.layers:
        assert d.max_deviation < 1e-12
    assert report.transform == 'rot:1'


def test_rotation_covariance_all_turns(texture_b):
    img = texture_b[:64, :64]
    for q in (0, 2, 3):
        report = check_rotation_covariance(img, CFG, quarter_turns=q)
        assert report.passed, q


def test_rotation_rejects_incompatible_grid():
    cfg = NetworkConfig(num_orientations=3, num_layers=1,
                        base_sigmas=(1.0,))
    with pytest.raises(ValueError, match='orientations'):
        check_rotation_covariance(np.zeros((32, 32)), cfg, quarter_turns=1)
    # two quarter turns map an odd grid onto itself
    report = check_rotation_covariance(np.zeros((32, 32)), cfg,
                                       quarter_turns=2)
    assert report.passed
