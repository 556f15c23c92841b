"""Command-line harness: configuration, dispatch, and run persistence.

Each invocation resolves to one ExperimentConfig (flat key=value file plus
command-line overrides), runs one subcommand, and persists a RunRecord as
runs/<config-hash>/record.json plus CSV tables.  record.json is a pure
function of the config — timestamps and wall-clock data go to a sibling
meta.json so identical configs produce byte-identical records.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import hashlib
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

ARTIFACT_VERSION = "0.1.0"
SCHEMA = 1


@dataclass
class ExperimentConfig:
    command: str
    n: int = 5
    round: bool = True
    S: float = 0.0            # used only when round is false
    L: int = 48
    q: int = 200
    k: int = 2
    L_opt: int = 16
    restarts: int = 8
    iterations: int = 500
    seed: int = 0
    eps_grid: tuple = (0.05, 0.075, 0.1, 0.15, 0.2)
    density: str = "const"    # const | two-bubble
    mu1: float = 0.0          # 0 means "use the oracle"
    out: str = "runs"

    def canonical(self) -> str:
        items = []
        for key, value in sorted(asdict(self).items()):
            if key == "out":
                continue  # output location must not change the payload hash
            if isinstance(value, tuple):
                value = ",".join(f"{v:.17g}" for v in value)
            items.append(f"{key}={value}")
        return "\n".join(items)

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]


@dataclass
class RunRecord:
    config_hash: str
    version: str
    payload: dict
    seed: int
    config: dict = field(default_factory=dict)


def _jsonify(obj):
    """Recursively coerce numpy scalars/arrays for deterministic JSON."""
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonify(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [f"{v:.17g}" if isinstance(v, float) else v for v in row]
            )


def _out_root(config: ExperimentConfig) -> Path:
    return Path(os.environ.get("PANEITZ_LAB_OUT", config.out))


# ---------------------------------------------------------------------------
# subcommand payloads


def _einstein_data(config: ExperimentConfig):
    from .einstein import EinsteinData, round_sphere

    if config.round:
        return round_sphere(config.n)
    return EinsteinData(n=config.n, S=config.S)


def _run_coeffs(config: ExperimentConfig):
    from .einstein import derive_coefficients, q_curvature_einstein, sharp_constant_report

    data = _einstein_data(config)
    coeffs = derive_coefficients(data)
    report = sharp_constant_report(data)
    payload = {
        "n": data.n,
        "S": data.S,
        "alpha": coeffs.alpha,
        "alpha_bar": coeffs.alpha_bar,
        "a": coeffs.a,
        "b": coeffs.b,
        "N": coeffs.N,
        "K2_inv_sq": coeffs.K2_inv_sq,
        "Q": q_curvature_einstein(data),
        "sharp_constant": {
            "oracle": report.oracle,
            "paper_formula": report.paper_formula,
            "sphere_volume_formula": report.sphere_volume_formula,
            "ratios": report.ratios,
        },
    }
    tables = {
        "coeffs": (
            ["quantity", "value"],
            [[k, float(v)] for k, v in payload.items() if isinstance(v, float)],
        )
    }
    summary = (
        f"n={data.n} alpha={coeffs.alpha:.6g} alpha_bar={coeffs.alpha_bar:.6g} "
        f"a={coeffs.a:.6g} b={coeffs.b:.6g} K2^-2={coeffs.K2_inv_sq:.6g} "
        f"(printed-formula ratio {report.ratios['paper_over_oracle']:.4g})"
    )
    return payload, tables, summary


def _density_for(config: ExperimentConfig, setup):
    from .optimizer import two_bubble_initializer
    from .spectral import constant_density, density_from_sqrt_field
    from .zonal import ZonalField

    if config.density == "const":
        return constant_density(setup.basis, setup.coeffs.N)
    if config.density == "two-bubble":
        p = two_bubble_initializer(0.1, 0.5, setup.basis)
        return density_from_sqrt_field(ZonalField(setup.basis, p.coeffs), setup.coeffs.N)
    raise SystemExit(f"unknown density '{config.density}' (const | two-bubble)")


def _run_spectrum(config: ExperimentConfig):
    from .spectral import normalized_invariant, round_setup, solve_density

    setup = round_setup(config.n, q=config.q, L=config.L)
    u = _density_for(config, setup)
    spec = solve_density(setup, u, config.k)
    lam_bar = [normalized_invariant(spec, u, j + 1) for j in range(len(spec))]
    payload = {
        "n": config.n,
        "density": config.density,
        "eigenvalues": list(spec.eigenvalues),
        "normalized_invariants": lam_bar,
        "residuals": list(spec.residuals),
        "shift": spec.shift,
    }
    tables = {
        "spectrum": (
            ["k", "lambda", "lambda_bar", "residual"],
            [
                [j + 1, float(spec.eigenvalues[j]), float(lam_bar[j]), float(spec.residuals[j])]
                for j in range(len(spec))
            ],
        )
    }
    summary = "lambda_bar = " + ", ".join(f"{v:.6g}" for v in lam_bar)
    return payload, tables, summary


def _run_minimize(config: ExperimentConfig):
    from .optimizer import OptimizerConfig, minimize

    res = minimize(
        OptimizerConfig(
            n=config.n,
            k=config.k,
            L_opt=config.L_opt,
            restarts=config.restarts,
            max_iters=config.iterations,
            seed=config.seed,
            q_nodes=config.q,
            L_final=config.L,
        )
    )
    rows = []
    for ridx, tr in enumerate(res.traces):
        for it in range(len(tr.objectives)):
            rows.append(
                [
                    ridx,
                    tr.start_label,
                    it,
                    float(tr.objectives[it]),
                    float(tr.lambda_bars[it]),
                    float(tr.grad_norms[it]) if it < len(tr.grad_norms) else "",
                    float(tr.gaps[it]) if it < len(tr.gaps) else "",
                    float(tr.residuals[it]) if it < len(tr.residuals) else "",
                ]
            )
    payload = {
        "n": config.n,
        "k": config.k,
        "best_coeffs": list(res.best.coeffs),
        "best_objective": res.best_objective,
        "final_objective": res.final_objective,
        "diagnostics": res.diagnostics,
        "restarts": [
            {
                "label": tr.start_label,
                "status": tr.status,
                "iterations": len(tr.objectives),
                "terminal_lambda_bar": tr.lambda_bars[-1] if tr.lambda_bars else None,
            }
            for tr in res.traces
        ],
    }
    tables = {
        "trace": (
            ["restart", "label", "iter", "objective", "lambda_bar", "grad_norm", "gap", "residual"],
            rows,
        )
    }
    summary = (
        f"mu_{config.k} estimate: {res.final_objective:.8g} "
        f"(engine value {res.best_objective:.8g})"
    )
    return payload, tables, summary


def _run_bubble_sweep(config: ExperimentConfig):
    from .bubbles import epsilon_sweep
    from .einstein import sharp_constant_oracle

    rep = epsilon_sweep(config.eps_grid, config.n, q=config.q)
    oracle = sharp_constant_oracle(config.n)
    payload = {
        "n": config.n,
        "eps": list(rep.eps),
        "Y": list(rep.Y),
        "A": rep.A,
        "C": rep.C,
        "residual": rep.residual,
        "oracle": oracle,
        "A_rel_error": rep.A / oracle - 1.0,
    }
    tables = {
        "sweep": (["eps", "Y"], [[float(e), float(y)] for e, y in zip(rep.eps, rep.Y)])
    }
    summary = (
        f"fit A={rep.A:.8g} (oracle {oracle:.8g}, rel err {payload['A_rel_error']:.3g}), "
        f"C={rep.C:.6g}, residual {rep.residual:.3g}"
    )
    return payload, tables, summary


def _run_lemma3_bound(config: ExperimentConfig):
    from .bubbles import lemma3_bound
    from .einstein import sharp_constant_oracle

    mu1 = config.mu1 if config.mu1 > 0 else sharp_constant_oracle(config.n)
    rep = lemma3_bound(config.n, mu1, config.eps_grid, q=config.q, L=config.L)
    payload = {
        "n": config.n,
        "mu1": mu1,
        "eps": list(rep.eps),
        "bounds": list(rep.bounds),
        "best_eps": rep.best_eps,
        "best_bound": rep.best_bound,
        "rhs": rep.rhs,
        "ratio": rep.ratio,
        "hypothesis_ok": rep.hypothesis_ok,
    }
    tables = {
        "bounds": (
            ["eps", "bound"],
            [[float(e), float(b)] for e, b in zip(rep.eps, rep.bounds)],
        )
    }
    summary = f"best bound {rep.best_bound:.8g} vs target {rep.rhs:.8g} (ratio {rep.ratio:.6g})"
    return payload, tables, summary


def _run_audit(config: ExperimentConfig):
    from .bubbles import elementary_inequality_check
    from .sobolev import (
        build_radial_grid,
        euclidean_corollary_check,
        lemma1_audit,
        refined_inequality_ratio,
        standard_bubble,
    )
    from .spectral import constant_density, round_setup
    from .zonal import ZonalField, constant_field

    setup = round_setup(config.n, q=config.q, L=config.L)
    u = constant_density(setup.basis, setup.coeffs.N)
    v = constant_field(setup.basis)
    reports = [refined_inequality_ratio(u, v, setup.coeffs)]
    rng = np.random.default_rng(config.seed)
    trial = [v]
    for _ in range(3):
        c = rng.standard_normal(setup.basis.dim) * 0.5 ** np.arange(setup.basis.dim)
        trial.append(ZonalField(setup.basis, c))
    reports += lemma1_audit(0.1, 2.0, trial, config.n)
    grid = build_radial_grid(config.n)
    bubble = standard_bubble(config.n)
    reports.append(euclidean_corollary_check(grid, bubble, bubble))
    violations = {
        "p3_C8": elementary_inequality_check(3.0, 8.0, 10_000, seed=config.seed),
        "p4_C16": elementary_inequality_check(4.0, 16.0, 10_000, seed=config.seed),
    }
    payload = {
        "n": config.n,
        "reports": [
            {
                "name": r.name,
                "lhs": r.lhs,
                "rhs": r.rhs,
                "ratio": r.ratio,
                "verdict": r.verdict,
                "details": r.details,
            }
            for r in reports
        ],
        "elementary_inequality_violations": violations,
    }
    tables = {
        "audits": (
            ["name", "lhs", "rhs", "ratio", "verdict"],
            [[r.name, float(r.lhs), float(r.rhs), float(r.ratio), r.verdict] for r in reports],
        )
    }
    summary = "; ".join(f"{r.name}: {r.verdict} (ratio {r.ratio:.6g})" for r in reports[:3])
    return payload, tables, summary


RUNNERS = {
    "coeffs": _run_coeffs,
    "spectrum": _run_spectrum,
    "minimize": _run_minimize,
    "bubble-sweep": _run_bubble_sweep,
    "lemma3-bound": _run_lemma3_bound,
    "audit": _run_audit,
}


def dispatch(config: ExperimentConfig) -> RunRecord:
    """Execute one subcommand and persist its RunRecord."""
    if config.command == "report":
        return _run_report(config)
    payload, tables, summary = RUNNERS[config.command](config)
    record = RunRecord(
        config_hash=config.config_hash,
        version=ARTIFACT_VERSION,
        payload=_jsonify(payload),
        seed=config.seed,
        config=_jsonify(asdict(config)),
    )
    run_dir = _out_root(config) / config.config_hash
    run_dir.mkdir(parents=True, exist_ok=True)
    doc = {
        "schema": SCHEMA,
        "config_hash": record.config_hash,
        "version": record.version,
        "seed": record.seed,
        "config": record.config,
        "payload": record.payload,
    }
    (run_dir / "record.json").write_text(
        json.dumps(doc, sort_keys=True, indent=2) + "\n"
    )
    # wall-clock data lives outside the deterministic record
    (run_dir / "meta.json").write_text(
        json.dumps(
            {"written": datetime.datetime.now(datetime.timezone.utc).isoformat()},
            indent=2,
        )
        + "\n"
    )
    for name, (header, rows) in tables.items():
        _write_csv(run_dir / f"{name}.csv", header, rows)
    print(f"[{config.command}] {summary}")
    print(f"run directory: {run_dir}")
    return record


def _run_report(config: ExperimentConfig) -> RunRecord:
    """Consolidate every valid record under the output root."""
    root = _out_root(config)
    rows = []
    for record_path in sorted(root.glob("*/record.json")):
        try:
            doc = json.loads(record_path.read_text())
            payload = doc["payload"]
            cmd = doc["config"]["command"]
        except (json.JSONDecodeError, KeyError, OSError) as exc:
            print(f"warning: skipping corrupted record {record_path}: {exc}", file=sys.stderr)
            continue
        row = {
            "hash": doc.get("config_hash", record_path.parent.name),
            "command": cmd,
            "n": doc["config"].get("n"),
        }
        if cmd == "minimize":
            row["mu_estimate"] = payload.get("final_objective")
            diag = payload.get("diagnostics") or {}
            row["attainment_product"] = diag.get("attainment_product")
        elif cmd == "lemma3-bound":
            row["bound_ratio"] = payload.get("ratio")
        elif cmd == "bubble-sweep":
            row["A_rel_error"] = payload.get("A_rel_error")
        rows.append(row)
    if not rows:
        print("no runs found under", root)
        return RunRecord(config_hash=config.config_hash, version=ARTIFACT_VERSION, payload={}, seed=config.seed)
    keys = sorted({k for r in rows for k in r})
    report_dir = root / "report"
    report_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(
        report_dir / "summary.csv",
        keys,
        [[("" if r.get(k) is None else r.get(k)) for k in keys] for r in rows],
    )
    doc = {"schema": SCHEMA, "version": ARTIFACT_VERSION, "rows": _jsonify(rows)}
    (report_dir / "summary.json").write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    for r in rows:
        print("  ".join(f"{k}={r[k]}" for k in keys if k in r and r[k] is not None))
    return RunRecord(config_hash=config.config_hash, version=ARTIFACT_VERSION, payload=doc, seed=config.seed)


# ---------------------------------------------------------------------------
# argument handling


def _load_config_file(path: str) -> dict:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise SystemExit(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key] = value
    return values


_INT_KEYS = {"n", "L", "q", "k", "L_opt", "restarts", "iterations", "seed"}
_FLOAT_KEYS = {"S", "mu1"}
_BOOL_KEYS = {"round"}


def _coerce(key: str, value: str):
    if key in _INT_KEYS:
        return int(value)
    if key in _FLOAT_KEYS:
        return float(value)
    if key in _BOOL_KEYS:
        return value.lower() in ("1", "true", "yes")
    if key == "eps_grid":
        return tuple(float(v) for v in value.split(","))
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="paneitz-lab",
        description="Numerical laboratory for fourth-order conformal eigenvalue invariants on round spheres.",
    )
    parser.add_argument("--config", help="flat key=value config file")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--n", type=int)
        p.add_argument("--round", action="store_true", default=None)
        p.add_argument("--S", type=float)
        p.add_argument("--L", type=int)
        p.add_argument("--q", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--out")

    for name, desc in [
        ("coeffs", "closed-form operator coefficients and the sharp-constant report"),
        ("spectrum", "generalized eigenvalues for a named density"),
        ("minimize", "descend the normalized eigenvalue invariant"),
        ("bubble-sweep", "fit the small-eps expansion of the sharp quotient"),
        ("lemma3-bound", "two-plane upper bound from the two-component test density"),
        ("audit", "evaluate the Sobolev-type inequalities on trial data"),
        ("report", "consolidate persisted runs"),
    ]:
        p = sub.add_parser(name, help=desc)
        common(p)
        if name in ("spectrum", "minimize"):
            p.add_argument("--k", type=int)
        if name == "spectrum":
            p.add_argument("--density", choices=["const", "two-bubble"])
        if name == "minimize":
            p.add_argument("--L-opt", dest="L_opt", type=int)
            p.add_argument("--restarts", type=int)
            p.add_argument("--iterations", type=int)
        if name in ("bubble-sweep", "lemma3-bound"):
            p.add_argument("--eps-grid", dest="eps_grid", type=str)
        if name == "lemma3-bound":
            p.add_argument("--mu1", type=float)
    return parser


def config_from_args(argv=None) -> ExperimentConfig:
    args = build_parser().parse_args(argv)
    values: dict = {}
    if args.config:
        for key, value in _load_config_file(args.config).items():
            values[key] = _coerce(key, value)
    for key, value in vars(args).items():
        if key == "config" or value is None:
            continue
        values[key] = _coerce(key, value) if isinstance(value, str) and key == "eps_grid" else value
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise SystemExit(f"invalid configuration: {exc}")


def main(argv=None) -> int:
    config = config_from_args(argv)
    try:
        dispatch(config)
    except (ValueError,) as exc:
        raise SystemExit(f"error: {exc}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
