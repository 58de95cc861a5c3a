import os

from tqdm import tqdm

from exprays.combinatorics import parse_address
from exprays.param_rays import ParamTraceConfig, trace_parameter_ray, verify_trace
from exprays.serialize import write_param_trace

ADDRESSES = ["|0", "|1", "|-1", "1|0", "-1|0", "|1 0", "|0 1", "|2", "|-2"]
T_START = 40.0
T_END = 1.0
CHECKPOINTS = (30.0, 20.0, 10.0, 5.0, 3.0)
OUTDIR = "../data/param_rays"
OVERWRITE = False

os.makedirs(OUTDIR, exist_ok=True)
cfg = ParamTraceConfig(checkpoints=CHECKPOINTS)

for text in tqdm(ADDRESSES):
    name = text.replace("|", "_").replace(" ", "").replace("-", "m")
    fout = f"{OUTDIR}/ray{name}.json"
    if os.path.exists(fout) and not OVERWRITE:
        continue

    s = parse_address(text)
    trace = trace_parameter_ray(s, T_START, T_END, cfg)
    report = verify_trace(trace)
    if not report.ok:
        print(f"{text}: checks {report.checks_violated()} violated at {len(report.violations)} samples")
    if trace.stopped_early:
        print(f"{text}: stopped early at t={trace.samples[-1].t}")

    write_param_trace(trace, fout, fmt="json", report=report)
    write_param_trace(trace, fout.replace(".json", ".csv"))
