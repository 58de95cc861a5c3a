"""
Command line front end.

    exprays eval        --address "|0" --kappa -2,0 --t 25
    exprays trace-dyn   --address "|1" --kappa -2,0 --t-range 1:20 --out ray.csv
    exprays trace-param --address "|0" --t-range 1:40 --out ray.json --format json
    exprays verify
    exprays variation   --address "|0" --kappa -2,0 --t 1
    exprays render-dyn  --kappa -2,0 --out dyn.ppm --overlay "|0" --overlay "|1"
    exprays render-param --out param.png --format png --overlay "|0"

Exit status: 0 on success, 1 on domain errors (and on verify violations),
2 on usage errors.
"""

import argparse
import sys

from exprays.common import ExpRaysException
from exprays.combinatorics import AddressError, parse_address
from exprays.config import merge_settings, parse_complex
from exprays.param_rays import ParamTraceConfig, trace_parameter_ray, verify_trace
from exprays.rays import RayTraceConfig, eval_ray, trace_ray
from exprays.render import ImageSpec, render_dynamic_plane, render_parameter_plane, write_png, write_ppm
from exprays.serialize import write_param_trace, write_ray_trace
from exprays.variation import dynamic_ray_variation
from exprays import verify

TRACE_FORMATS = ("csv", "json")
IMAGE_FORMATS = ("ppm", "png")

# options whose values may start with "-" (kappa "-2,0", address "-1|0")
DASHED_VALUE_OPTIONS = ("--kappa", "--center", "--address", "--overlay")


def address_arg(text):
    try:
        return parse_address(text)
    except AddressError as e:
        raise argparse.ArgumentTypeError(str(e))


def complex_arg(text):
    try:
        return parse_complex(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def range_arg(text):
    lo, sep, hi = text.partition(":")
    try:
        lo, hi = float(lo), float(hi)
    except ValueError:
        sep = ""
    if sep != ":" or not lo < hi:
        raise argparse.ArgumentTypeError(f"'{text}' is not a range lo:hi with lo < hi")
    return lo, hi


def join_dashed_values(argv):
    """ argparse reads "-2,0" as an option flag; attach such values to their option """
    out = []
    i = 0
    while i < len(argv):
        arg = argv[i]
        if arg in DASHED_VALUE_OPTIONS and i+1 < len(argv) and argv[i+1].startswith("-"):
            out.append(f"{arg}={argv[i+1]}")
            i += 2
            continue
        out.append(arg)
        i += 1
    return out


def build_parser():
    parser = argparse.ArgumentParser(prog="exprays", description="Dynamic and parameter rays of exp(z + kappa)")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="key=value settings file")
    common.add_argument("--verbose", action="store_true")
    common.add_argument("--out", default=None, help="output file (default: stdout for text formats)")
    common.add_argument("--format", default=None, choices=TRACE_FORMATS + IMAGE_FORMATS)
    common.add_argument("--H", type=float, default=None, help="seed threshold for ray evaluation")

    sub = parser.add_subparsers(dest="command")
    sub.required = True

    p = sub.add_parser("eval", parents=[common], help="one point of a dynamic ray")
    p.add_argument("--address", type=address_arg, required=True)
    p.add_argument("--kappa", type=complex_arg, required=True)
    p.add_argument("--t", type=float, required=True)

    p = sub.add_parser("trace-dyn", parents=[common], help="trace a dynamic ray")
    p.add_argument("--address", type=address_arg, required=True)
    p.add_argument("--kappa", type=complex_arg, required=True)
    p.add_argument("--t-range", type=range_arg, required=True)
    p.add_argument("--max-spatial-step", type=float, default=None)

    p = sub.add_parser("trace-param", parents=[common], help="trace a parameter ray")
    p.add_argument("--address", type=address_arg, required=True)
    p.add_argument("--t-range", type=range_arg, required=True)
    p.add_argument("--max-kappa-step", type=float, default=None)

    p = sub.add_parser("verify", parents=[common], help="run the invariant suites")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--n-random", type=int, default=None)

    p = sub.add_parser("variation", parents=[common], help="variation number of a dynamic ray")
    p.add_argument("--address", type=address_arg, required=True)
    p.add_argument("--kappa", type=complex_arg, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--t-cap", type=float, default=None)

    for name, what in (("render-dyn", "dynamical plane"), ("render-param", "parameter plane")):
        p = sub.add_parser(name, parents=[common], help=f"render the {what}")
        if name == "render-dyn":
            p.add_argument("--kappa", type=complex_arg, required=True)
        p.add_argument("--overlay", type=address_arg, action="append", default=[],
                       help="address whose ray is drawn on top (repeatable)")
        p.add_argument("--t-range", type=range_arg, default=None, help="potential range of overlays")
        p.add_argument("--center", type=complex_arg, default=None)
        p.add_argument("--width", type=float, default=None)
        p.add_argument("--width-px", type=int, default=None)
        p.add_argument("--height-px", type=int, default=None)
        p.add_argument("--max-iter", type=int, default=None)
    return parser


def _settings(args):
    overrides = {key: getattr(args, key, None) for key in
                 ("H", "max_spatial_step", "max_kappa_step", "seed", "n_random", "t_cap",
                  "center", "width", "width_px", "height_px", "max_iter")}
    return merge_settings(args.config, overrides)


def _stdout_or_file(args, writer, obj, **kwargs):
    writer(obj, args.out if args.out is not None else sys.stdout, args.format or "csv", **kwargs)


def cmd_eval(args, settings):
    smp = eval_ray(args.kappa, args.address, args.t, settings["H"], max_depth=settings["max_depth"],
                   eps=settings["boundary_eps"])
    print(f"t={smp.t!r} re={smp.z.real!r} im={smp.z.imag!r} residual={smp.residual!r}")
    return 0


def cmd_trace_dyn(args, settings):
    lo, hi = args.t_range
    trace = trace_ray(args.kappa, args.address, lo, hi, RayTraceConfig.from_settings(settings), args.verbose)
    _stdout_or_file(args, write_ray_trace, trace)
    return 0


def cmd_trace_param(args, settings):
    lo, hi = args.t_range
    trace = trace_parameter_ray(args.address, hi, lo, ParamTraceConfig.from_settings(settings),
                                verbose=args.verbose)
    kwargs = {"report": verify_trace(trace)} if args.format == "json" else {}
    _stdout_or_file(args, write_param_trace, trace, **kwargs)
    return 1 if trace.stopped_early else 0


def cmd_verify(args, settings):
    results = verify.run_all(settings, args.verbose)
    print(verify.summary_frame(results).to_string(index=False))
    failed = [r for r in results if not r.ok]
    for r in failed:
        for msg in r.violations[:10]:
            print(f"{r.name}: {msg}", file=sys.stderr)
    return 1 if failed else 0


def cmd_variation(args, settings):
    rv = dynamic_ray_variation(args.kappa, args.address, args.t, settings["t_cap"], settings["H"],
                               settings["samples_per_unit"], settings["rel_tol"], args.verbose,
                               boundary_eps=settings["boundary_eps"])
    print(f"alpha={rv.alpha!r} N={rv.N} bound={rv.bound!r} holds={rv.holds}")
    return 0 if rv.holds else 1


def _write_image(args, rendering):
    fmt = args.format or "ppm"
    if fmt == "png":
        write_png(args.out, rendering.image)
    else:
        write_ppm(args.out, rendering.image)


def cmd_render_dyn(args, settings):
    spec = ImageSpec.from_settings(settings)
    lo, hi = args.t_range or (1.0, settings["t_cap"])
    cfg = RayTraceConfig.from_settings(settings)
    overlays = [trace_ray(args.kappa, s, lo, hi, cfg) for s in args.overlay]
    _write_image(args, render_dynamic_plane(args.kappa, spec, overlays, args.verbose))
    return 0


def cmd_render_param(args, settings):
    spec = ImageSpec.from_settings(settings)
    lo, hi = args.t_range or (1.0, settings["t_cap"])
    cfg = ParamTraceConfig.from_settings(settings)
    overlays = [trace_parameter_ray(s, hi, lo, cfg, verbose=args.verbose) for s in args.overlay]
    _write_image(args, render_parameter_plane(spec, overlays, args.verbose))
    return 0


COMMANDS = {
    "eval": cmd_eval,
    "trace-dyn": cmd_trace_dyn,
    "trace-param": cmd_trace_param,
    "verify": cmd_verify,
    "variation": cmd_variation,
    "render-dyn": cmd_render_dyn,
    "render-param": cmd_render_param,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(join_dashed_values(sys.argv[1:] if argv is None else list(argv)))
    except SystemExit as e:
        return e.code

    if args.command.startswith("render"):
        if args.out is None:
            return _usage(parser, "argument --out: required for rendering")
        if args.format is not None and args.format not in IMAGE_FORMATS:
            return _usage(parser, f"argument --format: {args.format} is not an image format")
    elif args.command not in ("eval", "verify", "variation") and args.format is not None \
            and args.format not in TRACE_FORMATS:
        return _usage(parser, f"argument --format: {args.format} is not a trace format")

    try:
        settings = _settings(args)
        return COMMANDS[args.command](args, settings)
    except ExpRaysException as e:
        print(f"exprays {args.command}: {e}", file=sys.stderr)
        return 1
    except ValueError as e:
        return _usage(parser, str(e))


def _usage(parser, message):
    parser.print_usage(sys.stderr)
    print(f"{parser.prog}: error: {message}", file=sys.stderr)
    return 2


if __name__ == "__main__":
    sys.exit(main())
