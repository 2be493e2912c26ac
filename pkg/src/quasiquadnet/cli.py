"""Command line front end.

Exit codes: 0 success (and property checks that pass), 1 usage error,
2 data or configuration error, 3 a property check ran but failed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .cascade import NetworkConfig, build_network, config_hash, dump_maps
from .covariance import (check_rotation_covariance, check_scale_covariance,
                         report_to_json)
from .descriptor import (compute_descriptor, ingest_dataset, run_benchmark,
                         save_descriptor)
from .imagecore import ColourImage, ImagePlane, load_image
from .quad1d import QuadratureParams, argmax_over_scale, scale_response_curve
from .scalespace import make_kernel


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print('%s: error: %s' % (self.prog, message), file=sys.stderr)
        raise SystemExit(1)


def _add_config_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group('network configuration')
    g.add_argument('--config', metavar='FILE',
                   help='JSON file with configuration fields')
    g.add_argument('--orientations', type=int, help='number of orientations')
    g.add_argument('--layers', type=int, help='number of layers')
    g.add_argument('--tuple-len', type=int,
                   help='orientation history kept per channel')
    g.add_argument('--ratio', type=float, help='scale ratio between layers')
    g.add_argument('--sigmas', metavar='S1,S2,...',
                   help='comma separated base sigmas')
    g.add_argument('--gamma', type=float, help='scale power offset')
    g.add_argument('--second-order-weight', type=float,
                   help='relative weight of the second derivative term')
    g.add_argument('--post-smooth', type=float,
                   help='post smoothing ratio (0 disables)')
    g.add_argument('--trunc', type=float, help='kernel truncation multiple')


def _config_from_args(args) -> NetworkConfig:
    if args.config:
        cfg = NetworkConfig.from_dict(
            json.loads(Path(args.config).read_text()))
    else:
        cfg = NetworkConfig()
    overrides = {}
    if args.orientations is not None:
        overrides['num_orientations'] = args.orientations
    if args.layers is not None:
        overrides['num_layers'] = args.layers
    if args.tuple_len is not None:
        overrides['max_tuple_len'] = args.tuple_len
    if args.ratio is not None:
        overrides['level_scale_ratio'] = args.ratio
    if args.sigmas is not None:
        overrides['base_sigmas'] = tuple(
            float(v) for v in args.sigmas.split(',') if v)
    if args.gamma is not None:
        overrides['gamma'] = args.gamma
    if args.second_order_weight is not None:
        overrides['second_order_weight'] = args.second_order_weight
    if args.post_smooth is not None:
        overrides['post_smooth_ratio'] = args.post_smooth
    if args.trunc is not None:
        overrides['trunc_mult'] = args.trunc
    return replace(cfg, **overrides) if overrides else cfg


def _load_plane(path: str) -> np.ndarray:
    img = load_image(path)
    if isinstance(img, ImagePlane):
        return img.data
    if isinstance(img, ColourImage):
        from .descriptor import _grey_plane
        return _grey_plane(img, 'grey')[0]
    raise ValueError('unsupported image object from %s' % path)


def _cmd_kernels(args) -> int:
    kern = make_kernel(args.sigma, order=args.order, trunc_mult=args.trunc)
    print('offset,weight')
    for off, w in zip(range(-kern.radius, kern.radius + 1), kern.taps):
        print('%d,%.17g' % (off, w))
    return 0


def _cmd_qq1d(args) -> int:
    if args.s_min <= 0 or args.s_max <= args.s_min:
        raise ValueError('need 0 < s-min < s-max')
    params = QuadratureParams(second_order_weight=args.second_order_weight,
                              gamma=args.gamma)
    s = np.exp(np.linspace(math.log(args.s_min), math.log(args.s_max),
                           args.num))
    q = scale_response_curve(args.order, args.s0, s, params)
    print('# input order %d, s0 %g, gamma %g' % (args.order, args.s0,
                                                 args.gamma))
    try:
        print('# closed-form argmax s = %.17g'
              % argmax_over_scale(args.order, args.s0, args.gamma))
    except ValueError as exc:
        print('# closed-form argmax unavailable: %s' % exc)
    print('s,Q')
    for si, qi in zip(s, q):
        print('%.17g,%.17g' % (si, qi))
    return 0


def _cmd_extract(args) -> int:
    cfg = _config_from_args(args)
    plane = _load_plane(args.image)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    entries = []
    for sigma in cfg.base_sigmas:
        layers = build_network(plane, cfg, sigma, threads=args.threads)
        bundle = dump_maps(layers, outdir, prefix='map_s%g' % sigma)
        for e in bundle['maps']:
            e['base_sigma'] = sigma
        entries.extend(bundle['maps'])
    manifest = {
        'image': args.image,
        'config': cfg.to_dict(),
        'config_hash': config_hash(cfg),
        'maps': entries,
    }
    (outdir / 'manifest.json').write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + '\n')
    print('wrote %d maps and manifest.json to %s' % (len(entries), outdir))
    return 0


def _cmd_descriptor(args) -> int:
    cfg = _config_from_args(args)
    img = load_image(args.image)
    desc = compute_descriptor(img, cfg, colour=args.colour,
                              threads=args.threads, source=args.image)
    out = save_descriptor(desc, args.output, cfg)
    print('wrote %s (%d values, %s)' % (out, len(desc), desc.colour))
    return 0


def _cmd_bench(args) -> int:
    cfg = _config_from_args(args)
    ds = ingest_dataset(args.root, args.layout)
    report = run_benchmark(ds, cfg, split=args.split, metric=args.metric,
                           colour=args.colour, seed=args.seed,
                           threads=args.threads, cache_dir=args.cache_dir)
    for r in report['splits']:
        print('%s: accuracy %.4f (%d train / %d test)'
              % (r['name'], r['accuracy'], r['n_train'], r['n_test']))
    print('mean accuracy: %.4f over %d image(s), %d class(es)'
          % (report['mean_accuracy'], report['n_images'],
             len(report['classes'])))
    if args.output:
        Path(args.output).write_text(
            json.dumps(report, indent=2, sort_keys=True) + '\n')
        print('report written to %s' % args.output)
    return 0


def _cmd_covcheck(args) -> int:
    cfg = _config_from_args(args)
    plane = _load_plane(args.image)
    kind, _, value = args.transform.partition(':')
    if kind == 'scale':
        factor = float(value) if value else 2.0
        tol = args.tol if args.tol is not None else 0.05
        report = check_scale_covariance(plane, cfg, factor=factor, tol=tol,
                                        threads=args.threads)
    elif kind == 'rot':
        turns = int(value) if value else 1
        tol = args.tol if args.tol is not None else 1e-9
        report = check_rotation_covariance(plane, cfg, quarter_turns=turns,
                                           tol=tol, threads=args.threads)
    else:
        raise ValueError("transform must look like 'scale:2' or 'rot:1' "
                         '(got %r)' % args.transform)
    for d in report.layers:
        print('sigma %-6g layer %d: mean %.3e max %.3e (band %d, %d ch)'
              % (d.base_sigma, d.layer, d.mean_deviation, d.max_deviation,
                 d.band, d.n_channels))
    print('%s: %s (tolerance %g)' % (report.transform,
                                     'PASS' if report.passed else 'FAIL',
                                     report.tolerance))
    if args.output:
        Path(args.output).write_text(
            json.dumps(report_to_json(report), indent=2, sort_keys=True)
            + '\n')
    return 0 if report.passed else 3


def build_parser() -> _Parser:
    parser = _Parser(prog='qqnet',
                     description='Scale and rotation covariant hierarchical '
                                 'quadrature features.')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('kernels', help='print sampled kernel taps as CSV')
    p.add_argument('--sigma', type=float, required=True)
    p.add_argument('--order', type=int, default=0, choices=(0, 1, 2))
    p.add_argument('--trunc', type=float, default=4.0)
    p.set_defaults(func=_cmd_kernels)

    p = sub.add_parser('qq1d', help='quadrature response of an ideal blob '
                                    'over a log grid of scales')
    p.add_argument('--order', type=int, default=0, choices=(0, 1, 2),
                   help='derivative order of the input blob')
    p.add_argument('--s0', type=float, default=1.0)
    p.add_argument('--gamma', type=float, default=0.0)
    p.add_argument('--second-order-weight', type=float, default=8.0 / 11.0)
    p.add_argument('--s-min', type=float, default=0.1)
    p.add_argument('--s-max', type=float, default=100.0)
    p.add_argument('--num', type=int, default=64)
    p.set_defaults(func=_cmd_qq1d)

    p = sub.add_parser('extract', help='write all layer maps as 16-bit '
                                       'images plus a manifest')
    p.add_argument('image')
    p.add_argument('--outdir', required=True)
    p.add_argument('--threads', type=int, default=os.cpu_count() or 1)
    _add_config_args(p)
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser('descriptor', help='compute and save a descriptor')
    p.add_argument('image')
    p.add_argument('-o', '--output', required=True)
    p.add_argument('--colour', choices=('grey', 'luv'), default='grey')
    p.add_argument('--threads', type=int, default=os.cpu_count() or 1)
    _add_config_args(p)
    p.set_defaults(func=_cmd_descriptor)

    p = sub.add_parser('bench', help='nearest-neighbour benchmark over a '
                                     'directory tree of images')
    p.add_argument('--root', required=True)
    p.add_argument('--layout', choices=('kthtips2b', 'flat_dirs'),
                   default='kthtips2b')
    p.add_argument('--split', choices=('sample_holdout', 'scale_split',
                                       'random_half', 'loo'),
                   default='sample_holdout')
    p.add_argument('--metric', choices=('euclidean',
                                        'euclidean_standardized'),
                   default='euclidean')
    p.add_argument('--colour', choices=('grey', 'luv'), default='grey')
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--threads', type=int, default=os.cpu_count() or 1)
    p.add_argument('--cache-dir', help='reuse descriptors across runs')
    p.add_argument('-o', '--output', help='write the JSON report here')
    _add_config_args(p)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser('covcheck', help='check scale or rotation covariance '
                                        'of the network on an image')
    p.add_argument('image')
    p.add_argument('--transform', default='scale:2',
                   help="'scale:FACTOR' or 'rot:QUARTER_TURNS'")
    p.add_argument('--tol', type=float, default=None,
                   help='override the default tolerance')
    p.add_argument('--threads', type=int, default=os.cpu_count() or 1)
    p.add_argument('-o', '--output', help='write the JSON report here')
    _add_config_args(p)
    p.set_defaults(func=_cmd_covcheck)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print('error: %s' % exc, file=sys.stderr)
        return 2


if __name__ == '__main__':
    sys.exit(main())
