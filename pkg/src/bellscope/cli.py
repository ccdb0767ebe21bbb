"""Command-line front end.

Settings are given either as an angle in degrees within ``--plane`` (default
``xy``) or as an explicit vector ``x,y,z`` (renormalized).

Exit codes: 0 success, 2 argument or I/O error, 3 model/domain error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from bellscope import chsh, hvm, projection, quantum
from bellscope.tensor import UnitVector3
from bellscope.weatherall import tensor_product_expectation, tensor_single_expectation

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MODEL = 3

SOURCES = ("qm", "qm-sampled", "sign-model", "weatherall-projected")
TRIAL_SOURCES = ("qm-sampled", "sign-model", "weatherall-projected")
RENORM_TOL = 1e-6


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    settings: dict[str, UnitVector3] = field(default_factory=dict)
    n_trials: Optional[int] = None
    seed: int = 0
    output_format: str = "plain"
    output_path: Optional[Path] = None


def parse_setting(text: str, plane: str) -> UnitVector3:
    """``"45"`` -> angle in ``plane``; ``"1,1,0"`` -> normalized vector."""
    text = text.strip()
    try:
        if "," in text:
            parts = [float(p) for p in text.split(",")]
            if len(parts) != 3:
                raise UsageError(f"vector setting needs 3 components: {text!r}")
            if not all(math.isfinite(p) for p in parts):
                raise UsageError(f"non-finite component in {text!r}")
            norm = math.sqrt(sum(p * p for p in parts))
            if norm < RENORM_TOL:
                raise UsageError(f"setting {text!r} is (nearly) the zero vector")
            return UnitVector3.normalized(parts)
        deg = float(text)
    except ValueError as exc:
        raise UsageError(f"cannot parse setting {text!r}: {exc}") from None
    if not math.isfinite(deg):
        raise UsageError(f"non-finite angle {text!r}")
    return UnitVector3.from_angle(deg, plane)


def _num(x: float, digits: int = 7) -> str:
    s = f"{x:.{digits}f}"
    if float(s) == 0.0:
        s = f"{0.0:.{digits}f}"
    return s


def _vec(v: UnitVector3) -> str:
    return "(" + ", ".join(_num(c, 6) for c in (v.x, v.y, v.z)) + ")"


def _emit(text: str, path: Optional[Path]) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from None


def _dump(obj: dict) -> str:
    return json.dumps(obj, indent=2) + "\n"


# -- commands ----------------------------------------------------------------

def cmd_qm(cfg: RunConfig) -> str:
    a, b = cfg.settings["a"], cfg.settings["b"]
    ea = quantum.qm_single_expectation("A", a)
    eb = quantum.qm_single_expectation("B", b)
    eab = quantum.qm_product_expectation(a, b)
    if cfg.output_format == "json":
        return _dump({"schema_version": hvm.SCHEMA_VERSION, "command": "qm",
                      "a": [a.x, a.y, a.z], "b": [b.x, b.y, b.z],
                      "E_A": ea, "E_B": eb, "E_AB": eab})
    if cfg.output_format == "csv":
        return "E_A,E_B,E_AB\n" + f"{ea!r},{eb!r},{eab!r}\n"
    return (f"a = {_vec(a)}\nb = {_vec(b)}\n"
            f"E(A)  = {_num(ea)}\nE(B)  = {_num(eb)}\nE(AB) = {_num(eab)}\n")


def cmd_weatherall_demo(cfg: RunConfig) -> str:
    a, b = cfg.settings["a"], cfg.settings["b"]
    model = projection.weatherall_ghvm()
    pre = tensor_product_expectation(a, b)
    single_a = tensor_single_expectation("A", a)
    single_b = tensor_single_expectation("B", b)
    per_state = []
    for lam in (1, -1):
        pa = model.projections.project(a, model.observable_A(a, lam))
        pb = model.projections.project(b, model.observable_B(b, lam))
        per_state.append((lam, pa, pb, pa * pb))
    post = projection.projected_product_expectation(model, a, b)
    post_a = projection.projected_single_expectation(model, "A", a)
    post_b = projection.projected_single_expectation(model, "B", b)
    qm = quantum.qm_product_expectation(a, b)

    if cfg.output_format == "json":
        return _dump({
            "schema_version": hvm.SCHEMA_VERSION, "command": "weatherall-demo",
            "a": [a.x, a.y, a.z], "b": [b.x, b.y, b.z],
            "tensor_single_A_is_zero": single_a.is_zero(),
            "tensor_single_B_is_zero": single_b.is_zero(),
            "pre_projection_E_AB": pre,
            "per_state": [{"lambda": l, "P_a(A)": x, "P_b(B)": y, "product": p} for l, x, y, p in per_state],
            "projected_E_A": post_a, "projected_E_B": post_b,
            "projected_E_AB": post,
            "quantum_E_AB": qm,
        })
    if cfg.output_format == "csv":
        return ("pre_projection_E_AB,projected_E_AB,quantum_E_AB\n"
                f"{pre!r},{post!r},{qm!r}\n")
    lines = [
        f"a = {_vec(a)}",
        f"b = {_vec(b)}",
        f"tensor E(A), E(B)             : {'zero bivector' if single_a.is_zero() else single_a.components}, "
        f"{'zero bivector' if single_b.is_zero() else single_b.components}",
        f"pre-projection  E(A.B)        = {_num(pre)}",
    ]
    for lam, pa, pb, p in per_state:
        lines.append(f"  lambda = {lam:+d}: P_a(A) = {pa:+d}, P_b(B) = {pb:+d}, product = {p:+d}")
    lines += [
        f"projected E(A), E(B)          = {_num(post_a)}, {_num(post_b)}",
        f"post-projection E(P(A) P(B))  = {_num(post)}",
        f"quantum         E(AB)         = {_num(qm)}",
    ]
    return "\n".join(lines) + "\n"


def _chsh_settings(raw: Optional[Sequence[str]], plane: str) -> chsh.ChshSettings:
    if raw is None:
        return chsh.ChshSettings.coplanar(0.0, 90.0, 45.0, 135.0, plane)
    a, ap, b, bp = (parse_setting(t, plane) for t in raw)
    return chsh.ChshSettings(a, ap, b, bp)


def cmd_chsh(cfg: RunConfig, args: argparse.Namespace) -> str:
    source = args.source
    if source not in SOURCES:
        raise UsageError(f"unknown source {source!r}; choose from {', '.join(SOURCES)}")
    n = cfg.n_trials
    if source == "qm-sampled" and n is None:
        n = 1_000_000

    if source in ("qm", "qm-sampled"):
        correlator = chsh.quantum_correlator()
    elif source == "sign-model":
        correlator = chsh.sign_model_correlator()
    else:
        correlator = chsh.hvm_correlator(projection.reduce_to_hvm(projection.weatherall_ghvm()))

    search = None
    if args.optimize:
        search_cfg = chsh.SearchConfig(mode=args.mode, grid_step_deg=args.grid_step, plane=args.plane)
        search = chsh.maximize_chsh(correlator, search_cfg)
        settings = search.settings
    else:
        settings = _chsh_settings(args.settings, args.plane)

    if source == "qm-sampled":
        report = chsh.sampled_chsh_qm(settings, n, cfg.seed)
    elif n is not None and source == "sign-model":
        report = chsh.sampled_chsh_hvm(hvm.make_sign_model(), settings, n, cfg.seed)
    elif n is not None and source == "weatherall-projected":
        reduced = projection.reduce_to_hvm(projection.weatherall_ghvm())
        report = chsh.sampled_chsh_hvm(reduced, settings, n, cfg.seed)
    else:
        report = chsh.chsh_statistic(correlator, settings, source=source)
    report = chsh.ChshReport(report.settings, report.correlations, report.statistic, source, report.n_trials)

    if cfg.output_format == "json":
        d = report.to_dict()
        d["command"] = "chsh"
        d["seed"] = cfg.seed if report.n_trials else None
        if search is not None:
            d["optimized"] = {"S_max": search.s_max, "grid_S_max": search.grid_s_max,
                              "mode": args.mode, "grid_step_deg": args.grid_step}
        return _dump(d)
    if cfg.output_format == "csv":
        return chsh.sweep_to_csv([report])
    labels = ("E(a,b)", "E(a,b')", "E(a',b)", "E(a',b')")
    lines = [f"source: {source}" + (f" (n = {report.n_trials} per pair, seed {cfg.seed})" if report.n_trials else "")]
    for name, v in zip(("a", "a'", "b", "b'"), settings.vectors()):
        lines.append(f"{name:<3}= {_vec(v)}")
    for lab, e in zip(labels, report.correlations):
        lines.append(f"{lab:<9}= {_num(e)}")
    if search is not None:
        lines.append(f"S_max    = {_num(search.s_max)}")
    lines.append(f"S        = {_num(report.statistic)}")
    lines.append(f"S <= 2   : {'yes' if report.bound_satisfied else 'no (violated)'}")
    return "\n".join(lines) + "\n"


def trial_record(source: str, a: UnitVector3, b: UnitVector3, n: int, seed: int) -> hvm.TrialRecord:
    if source == "qm-sampled":
        out = quantum.sample_joint(quantum.qm_joint_distribution(a, b), n, seed)
        return hvm.TrialRecord(a, b, out, seed)
    if source == "sign-model":
        return hvm.simulate_trials(hvm.make_sign_model(), a, b, n, seed)
    if source == "weatherall-projected":
        return hvm.simulate_trials(projection.reduce_to_hvm(projection.weatherall_ghvm()), a, b, n, seed)
    raise UsageError(f"unknown trial source {source!r}; choose from {', '.join(TRIAL_SOURCES)}")


def cmd_trials(cfg: RunConfig, args: argparse.Namespace) -> tuple[str, str]:
    """Returns (record, summary)."""
    a, b = cfg.settings["a"], cfg.settings["b"]
    rec = trial_record(args.source, a, b, cfg.n_trials, cfg.seed)
    est = rec.summary()
    fmt = cfg.output_format
    if fmt == "json":
        d = rec.to_dict()
        d["source"] = args.source
        d["summary"] = est.to_dict()
        record = json.dumps(d) + "\n"
    else:
        record = rec.to_csv()
    summary = (f"source {args.source}, n = {est.n_trials}, seed {cfg.seed}: "
               f"mean A = {_num(est.mean_A)}, mean B = {_num(est.mean_B)}, "
               f"mean AB = {_num(est.mean_AB)} +/- {_num(est.std_error_AB)}\n")
    return record, summary


# -- argument parsing --------------------------------------------------------

def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _seed(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("seed must be >= 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--plane", default="xy", help="plane for angle settings (default xy)")
    common.add_argument("--format", dest="output_format", choices=("plain", "json", "csv"), default=None)
    common.add_argument("--out", type=Path, default=None, help="write output to this file")

    p = argparse.ArgumentParser(prog="bellscope", description="EPR-Bohm correlations, hidden-variable models and CHSH.")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("qm", parents=[common], help="quantum expectation values for the singlet")
    q.add_argument("--a", required=True, help="Alice's setting: angle in degrees or x,y,z")
    q.add_argument("--b", required=True, help="Bob's setting: angle in degrees or x,y,z")

    w = sub.add_parser("weatherall-demo", parents=[common],
                       help="bivector model before and after projection, against the quantum value")
    w.add_argument("--a", required=True)
    w.add_argument("--b", required=True)

    c = sub.add_parser("chsh", parents=[common], help="CHSH statistic for a correlation source")
    c.add_argument("--source", required=True, choices=SOURCES)
    c.add_argument("--settings", nargs=4, metavar=("A", "A_PRIME", "B", "B_PRIME"),
                   help="four settings (default 0 90 45 135 degrees)")
    c.add_argument("--optimize", action="store_true", help="search settings maximizing S")
    c.add_argument("--mode", choices=("coplanar", "sphere"), default="coplanar")
    c.add_argument("--grid-step", type=float, default=None,
                   help="grid spacing in degrees (default 1 coplanar, 15 sphere)")
    c.add_argument("--n", type=_positive_int, default=None, help="trials per correlation (sampled sources)")
    c.add_argument("--seed", type=_seed, default=0)

    t = sub.add_parser("trials", parents=[common], help="write a +/-1 trial record")
    t.add_argument("--source", required=True, choices=TRIAL_SOURCES)
    t.add_argument("--a", required=True)
    t.add_argument("--b", required=True)
    t.add_argument("--n", type=_positive_int, required=True)
    t.add_argument("--seed", type=_seed, default=0)
    return p


def _config(args: argparse.Namespace) -> RunConfig:
    default_fmt = "csv" if args.command == "trials" else "plain"
    cfg = RunConfig(args.command, seed=getattr(args, "seed", 0),
                    n_trials=getattr(args, "n", None),
                    output_format=args.output_format or default_fmt, output_path=args.out)
    for key in ("a", "b"):
        if getattr(args, key, None) is not None:
            cfg.settings[key] = parse_setting(getattr(args, key), args.plane)
    return cfg


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "grid_step", "unset") is None:
        args.grid_step = 15.0 if args.mode == "sphere" else 1.0
    fmt = args.output_format
    try:
        cfg = _config(args)
        if args.command == "qm":
            _emit(cmd_qm(cfg), cfg.output_path)
        elif args.command == "weatherall-demo":
            _emit(cmd_weatherall_demo(cfg), cfg.output_path)
        elif args.command == "chsh":
            _emit(cmd_chsh(cfg, args), cfg.output_path)
        elif args.command == "trials":
            if cfg.output_format == "plain":
                raise UsageError("trials writes csv or json")
            record, summary = cmd_trials(cfg, args)
            _emit(record, cfg.output_path)
            (sys.stdout if cfg.output_path is not None else sys.stderr).write(summary)
    except UsageError as exc:
        print(f"bellscope: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except projection.ReductionError as exc:
        msg = exc.to_json() if fmt == "json" else f"bellscope: reduction error: {exc}"
        print(msg, file=sys.stderr)
        return EXIT_MODEL
    except (projection.DomainError, chsh.CorrelatorContractError, chsh.BoundViolation,
            hvm.ObservableContractError, ValueError) as exc:
        print(f"bellscope: model error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
