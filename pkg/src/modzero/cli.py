"""Batch orchestration: compute forms, find zeros, run the experiments.

All outputs carry the "modzero/1" schema marker (a column in CSVs, a
field in JSON) and a manifest records the configuration hash, so reruns
are diffable and downstream tools can validate what they read.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from mpmath import mp

from . import eigen, incgamma, measure, potential, zerofind
from .evaluate import UpperHalfPoint
from .qseries import dim_cusp

SCHEMA = "modzero/1"


@dataclass
class RunConfig:
    weights: list
    kinds: list = field(default_factory=lambda: ["eisenstein", "eigenform"])
    precision_bits: int = 192
    trunc: int | None = None
    eps: float = 1e-6
    grid: str = "6x6"
    jobs: int = 1
    out: str = "out"

    def __post_init__(self):
        if any(k % 2 or k < 4 for k in self.weights):
            raise ValueError("weights must be even and >= 4")
        if not 0 < self.eps <= 1e-2:
            raise ValueError("eps must be in (0, 1e-2]")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")

    def semantic_dict(self) -> dict:
        return {
            "weights": self.weights,
            "kinds": self.kinds,
            "precision_bits": self.precision_bits,
            "trunc": self.trunc,
            "eps": self.eps,
            "grid": self.grid,
        }

    def config_hash(self) -> str:
        blob = json.dumps(self.semantic_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _parse_weights(spec: str) -> list:
    out = []
    for part in spec.split(","):
        if ":" in part:
            bits = [int(b) for b in part.split(":")]
            start, stop = bits[0], bits[1]
            step = bits[2] if len(bits) > 2 else 2
            out.extend(range(start, stop + 1, step))
        else:
            out.append(int(part))
    return sorted(set(out))


def _forms_for_weight(k: int, config: RunConfig) -> list:
    forms = []
    if "eisenstein" in config.kinds:
        forms.append(eigen.eisenstein_form(k, config.trunc, config.precision_bits))
    if "eigenform" in config.kinds:
        for idx in range(dim_cusp(k)):
            forms.append(eigen.eigenform(k, idx, config.trunc, config.precision_bits))
    return forms


def _write_manifest(config: RunConfig, command: str, files: list):
    path = os.path.join(config.out, f"manifest_{command}.json")
    with open(path, "w") as fh:
        json.dump(
            {
                "schema": SCHEMA,
                "command": command,
                "config": config.semantic_dict(),
                "config_hash": config.config_hash(),
                "files": sorted(files),
            },
            fh,
            indent=2,
            sort_keys=True,
        )
    return path


def cmd_forms(config: RunConfig) -> list:
    os.makedirs(os.path.join(config.out, "forms"), exist_ok=True)
    files = []
    for k in config.weights:
        for f in _forms_for_weight(k, config):
            tag = "eis" if f.kind == "eisenstein" else f"eig{f.eigen_index}"
            name = f"forms/k{k}_{tag}.json"
            with open(os.path.join(config.out, name), "w") as fh:
                json.dump(f.to_json_dict(), fh, sort_keys=True)
            files.append(name)
    _write_manifest(config, "forms", files)
    return files


def _zeros_rows_for_weight(args) -> list:
    k, config = args
    rows = []
    for f in _forms_for_weight(k, config):
        idx = -1 if f.eigen_index is None else f.eigen_index
        try:
            zs = zerofind.zeros_in_F(f)
            for rec in zs.records:
                abs_z = math.hypot(rec.point.x, rec.point.y)
                rows.append(
                    [SCHEMA, str(k), f.kind, str(idx), _fmt(rec.point.x), _fmt(rec.point.y),
                     str(rec.multiplicity), str(rec.stab_weight), _fmt(abs_z),
                     _fmt(rec.residual_log), "ok"]
                )
        except (zerofind.ValenceMismatchError, zerofind.RootConvergenceError) as exc:
            rows.append([SCHEMA, str(k), f.kind, str(idx), "", "", "", "", "", "",
                         f"error: {exc}"])
    return rows


def _run_per_weight(worker, config: RunConfig) -> list:
    tasks = [(k, config) for k in config.weights]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            chunks = list(pool.map(worker, tasks))
    else:
        chunks = [worker(t) for t in tasks]
    return [row for chunk in chunks for row in chunk]


ZEROS_HEADER = ["schema", "k", "kind", "eigen_index", "re", "im", "multiplicity",
                "stab_weight", "abs_z", "residual_log", "status"]


def cmd_zeros(config: RunConfig) -> str:
    rows = _run_per_weight(_zeros_rows_for_weight, config)
    rows.sort(key=lambda r: (int(r[1]), r[2], int(r[3]),
                             -(float(r[5]) if r[5] else 0.0), float(r[4]) if r[4] else 0.0))
    path = os.path.join(config.out, "zeros.csv")
    _write_csv(path, ZEROS_HEADER, rows)
    _write_manifest(config, "zeros", ["zeros.csv"])
    return path


MEASURES_HEADER = ["schema", "k", "kind", "eigen_index", "box_id", "x_lo", "x_hi",
                   "y_lo", "y_hi", "empirical", "volume", "diff", "status"]


def _grid_from_spec(spec: str) -> list:
    nx, ny = (int(v) for v in spec.split("x"))
    return measure.default_grid(nx, ny)


def _measures_rows_for_weight(args) -> list:
    k, config = args
    grid = _grid_from_spec(config.grid)
    rows = []
    for f in _forms_for_weight(k, config):
        idx = -1 if f.eigen_index is None else f.eigen_index
        try:
            zs = zerofind.zeros_in_F(f)
            report = measure.measure_report(f, zs, grid)
            for box_id, (box, emp, vol, diff) in enumerate(report.rows):
                rows.append([SCHEMA, str(k), f.kind, str(idx), str(box_id),
                             _fmt(box.x_lo), _fmt(box.x_hi), _fmt(box.y_lo), _fmt(box.y_hi),
                             _fmt(emp), _fmt(vol), _fmt(diff), "ok"])
        except measure.EmptyZeroSetError:
            rows.append([SCHEMA, str(k), f.kind, str(idx), "", "", "", "", "", "", "", "",
                         "defined-empty"])
        except (zerofind.ValenceMismatchError, zerofind.RootConvergenceError) as exc:
            rows.append([SCHEMA, str(k), f.kind, str(idx), "", "", "", "", "", "", "", "",
                         f"error: {exc}"])
    return rows


def cmd_measures(config: RunConfig) -> str:
    rows = _run_per_weight(_measures_rows_for_weight, config)
    rows.sort(key=lambda r: (int(r[1]), r[2], int(r[3]), r[4]))
    path = os.path.join(config.out, "measures.csv")
    _write_csv(path, MEASURES_HEADER, rows)
    summary = {}
    for r in rows:
        if r[-1] == "ok" and r[11]:
            key = f"k{r[1]}_{r[2]}{r[3]}"
            summary[key] = max(summary.get(key, 0.0), abs(float(r[11])))
    spath = os.path.join(config.out, "measures_summary.json")
    with open(spath, "w") as fh:
        json.dump({"schema": SCHEMA, "sup_diff": summary}, fh, indent=2, sort_keys=True)
    _write_manifest(config, "measures", ["measures.csv", "measures_summary.json"])
    return path


GAMMA_HEADER = ["schema", "k", "ratio", "theta", "poisson_cdf"]


def cmd_gamma(config: RunConfig) -> str:
    rows = []
    for k in config.weights:
        rows.append([SCHEMA, str(k), _fmt(incgamma.ratio_half(max(k, 3))),
                     _fmt(incgamma.ramanujan_theta(k)), _fmt(incgamma.poisson_cdf_half(k))])
    path = os.path.join(config.out, "gamma.csv")
    _write_csv(path, GAMMA_HEADER, rows)
    _write_manifest(config, "gamma", ["gamma.csv"])
    return path


def cmd_potential(config: RunConfig, phi_center: complex = 1.5j, phi_radius: float = 0.3) -> str:
    phi = potential.BumpFunction(UpperHalfPoint(phi_center.real, phi_center.imag), phi_radius)
    results = []
    for k in config.weights:
        for f in _forms_for_weight(k, config):
            zs = zerofind.zeros_in_F(f)
            res = potential.check_zero_identity(f, zs, phi, quad_eps=config.eps)
            results.append({
                "k": k, "kind": f.kind,
                "eigen_index": -1 if f.eigen_index is None else f.eigen_index,
                "phi_center": [phi_center.real, phi_center.imag],
                "phi_radius": phi_radius,
                "lhs": res["lhs"], "rhs": res["rhs"],
                "rhs_invariant": res["rhs_invariant"],
                "diff": res["diff"], "quad_eps": config.eps,
            })
    path = os.path.join(config.out, "potential.json")
    with open(path, "w") as fh:
        json.dump({"schema": SCHEMA, "checks": results}, fh, indent=2, sort_keys=True)
    _write_manifest(config, "potential", ["potential.json"])
    return path


SUPNORM_HEADER = ["schema", "k", "kind", "eigen_index", "sup_log", "bound_log", "status"]


def cmd_supnorm(config: RunConfig) -> str:
    grid = incgamma.default_sup_grid()
    forms = []
    for k in config.weights:
        if dim_cusp(k) > 0:
            f = eigen.eigenform(k, 0, config.trunc, config.precision_bits)
            measure.petersson_norm(f)
            forms.append(f)
    sups, slope = incgamma.sup_mass_experiment(forms, grid)
    rows = []
    heights = sorted({p.y for p in grid})
    for f, s in zip(forms, sups):
        # rigorous pointwise bound: y^k|f|^2 <= S * series(y), where S is the
        # Siegel-set coefficient sum; the bound for a grid sup is maximized
        # over the grid heights and normalized by the Petersson norm
        siegel = measure.siegel_norm_coefficient_sum(f)
        adjust = float(mp.log(siegel) - mp.log(f.petersson_norm))
        bound = max(incgamma.bound_series(f.weight, y) for y in heights) + adjust
        rows.append([SCHEMA, str(f.weight), f.kind, str(f.eigen_index), _fmt(s), _fmt(bound), "ok"])
    path = os.path.join(config.out, "supnorm.csv")
    _write_csv(path, SUPNORM_HEADER, rows)
    with open(os.path.join(config.out, "supnorm_summary.json"), "w") as fh:
        json.dump({"schema": SCHEMA, "slope": slope}, fh, indent=2, sort_keys=True)
    _write_manifest(config, "supnorm", ["supnorm.csv", "supnorm_summary.json"])
    return path


def _write_csv(path: str, header: list, rows: list):
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _env_default(name: str, fallback):
    return os.environ.get(f"MODZ_{name.upper()}", fallback)


def build_config(args) -> RunConfig:
    return RunConfig(
        weights=_parse_weights(args.weights),
        kinds=args.kinds.split(","),
        precision_bits=args.precision_bits,
        trunc=args.trunc,
        eps=args.eps,
        grid=args.grid,
        jobs=args.jobs,
        out=args.out,
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="modzero",
                                     description="Level-1 modular form computations")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ["forms", "zeros", "measures", "gamma", "potential", "supnorm"]:
        p = sub.add_parser(name)
        p.add_argument("--weights", default=_env_default("weights", "12:48"))
        p.add_argument("--kinds", default=_env_default("kinds", "eisenstein,eigenform"))
        p.add_argument("--precision-bits", type=int,
                       default=int(_env_default("precision_bits", 192)))
        p.add_argument("--trunc", type=int, default=None)
        p.add_argument("--eps", type=float, default=float(_env_default("eps", 1e-6)))
        p.add_argument("--grid", default=_env_default("grid", "6x6"))
        p.add_argument("--jobs", type=int, default=int(_env_default("jobs", 1)))
        p.add_argument("--out", default=_env_default("out", "out"))
    args = parser.parse_args(argv)
    try:
        config = build_config(args)
        os.makedirs(config.out, exist_ok=True)
        handler = {
            "forms": cmd_forms, "zeros": cmd_zeros, "measures": cmd_measures,
            "gamma": cmd_gamma, "potential": cmd_potential, "supnorm": cmd_supnorm,
        }[args.command]
        handler(config)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
