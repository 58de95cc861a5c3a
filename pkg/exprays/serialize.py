"""
CSV and JSON input/output for orbits, dynamic ray traces and parameter ray
traces. CSV files carry a header row and floats written with "%.17g", so
reading a file back reproduces every value exactly. JSON documents have a
top-level schema_version.
"""

import json
from dataclasses import asdict

import pandas as pd

from exprays.common import ExpRaysException
from exprays.combinatorics import format_address, parse_address
from exprays.dynamics import OrbitRecord
from exprays.param_rays import ParamSample, ParamTrace
from exprays.rays import RaySample, RayTrace

SCHEMA_VERSION = 1
FLOAT_FORMAT = "%.17g"


class SerializeError(ExpRaysException):
    pass


def _complex_pair(z):
    return [z.real, z.imag]


def write_frame_csv(df, path):
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT)


def write_json(doc, path):
    doc = dict(doc, schema_version=SCHEMA_VERSION)
    if hasattr(path, "write"):
        json.dump(doc, path, indent=2)
        return
    with open(path, "w") as fid:
        json.dump(doc, fid, indent=2)


def read_json(path):
    with open(path) as fid:
        doc = json.load(fid)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise SerializeError(f"{path}: unsupported schema_version {doc.get('schema_version')}")
    return doc


def orbit_to_dict(record):
    return {
        "kind": "orbit",
        "escaped": record.escaped,
        "escape_index": record.escape_index,
        "points": [_complex_pair(z) for z in record.points],
    }


def ray_trace_to_dict(trace):
    return {
        "kind": "dynamic_ray",
        "address": format_address(trace.address),
        "kappa": _complex_pair(trace.kappa),
        "diagnostics": trace.diagnostics,
        "samples": [{"t": smp.t, "z": _complex_pair(smp.z), "residual": smp.residual,
                     "depth": smp.depth_used} for smp in trace.samples],
    }


def param_trace_to_dict(trace, report=None):
    doc = {
        "kind": "parameter_ray",
        "address": format_address(trace.address),
        "stopped_early": trace.stopped_early,
        "config": asdict(trace.config) if trace.config is not None else None,
        "samples": [{"t": smp.t, "kappa": _complex_pair(smp.kappa), "residual": smp.residual,
                     "iters": smp.newton_iters} for smp in trace.samples],
    }
    if report is not None:
        doc["verify"] = report.to_dict()
    return doc


def write_orbit(record, path, fmt="csv"):
    if fmt == "csv":
        write_frame_csv(record.to_frame(), path)
    elif fmt == "json":
        write_json(orbit_to_dict(record), path)
    else:
        raise SerializeError(f"orbits cannot be written as {fmt}")


def write_ray_trace(trace, path, fmt="csv"):
    if fmt == "csv":
        write_frame_csv(trace.to_frame(), path)
    elif fmt == "json":
        write_json(ray_trace_to_dict(trace), path)
    else:
        raise SerializeError(f"ray traces cannot be written as {fmt}")


def write_param_trace(trace, path, fmt="csv", report=None):
    if fmt == "csv":
        write_frame_csv(trace.to_frame(), path)
    elif fmt == "json":
        write_json(param_trace_to_dict(trace, report), path)
    else:
        raise SerializeError(f"parameter traces cannot be written as {fmt}")


def read_orbit_csv(path):
    df = pd.read_csv(path, float_precision="round_trip")
    return OrbitRecord(points=[complex(r, i) for r, i in zip(df.re, df.im)])


def read_ray_trace_csv(path, address, kappa):
    """ RayTrace from a CSV written by write_ray_trace; address may be a literal """
    if type(address) == str:
        address = parse_address(address)
    df = pd.read_csv(path, float_precision="round_trip")
    samples = [RaySample(t=float(row.t), z=complex(row.re, row.im), residual=float(row.residual),
                         depth_used=int(row.depth)) for row in df.itertuples()]
    return RayTrace(address=address, kappa=complex(kappa), samples=samples)


def read_param_trace_csv(path, address):
    """ ParamTrace from a CSV written by write_param_trace; address may be a literal """
    if type(address) == str:
        address = parse_address(address)
    df = pd.read_csv(path, float_precision="round_trip")
    samples = [ParamSample(t=float(row.t), kappa=complex(row.re_kappa, row.im_kappa),
                           residual=float(row.residual), newton_iters=int(row.iters))
               for row in df.itertuples()]
    return ParamTrace(address=address, samples=samples)


def read_ray_trace_json(path):
    doc = read_json(path)
    if doc.get("kind") != "dynamic_ray":
        raise SerializeError(f"{path} does not hold a dynamic ray")
    samples = [RaySample(t=smp["t"], z=complex(*smp["z"]), residual=smp["residual"],
                         depth_used=smp["depth"]) for smp in doc["samples"]]
    return RayTrace(address=parse_address(doc["address"]), kappa=complex(*doc["kappa"]),
                    samples=samples, diagnostics=doc["diagnostics"])


def read_param_trace_json(path):
    doc = read_json(path)
    if doc.get("kind") != "parameter_ray":
        raise SerializeError(f"{path} does not hold a parameter ray")
    samples = [ParamSample(t=smp["t"], kappa=complex(*smp["kappa"]), residual=smp["residual"],
                           newton_iters=smp["iters"]) for smp in doc["samples"]]
    return ParamTrace(address=parse_address(doc["address"]), samples=samples,
                      stopped_early=doc["stopped_early"])
