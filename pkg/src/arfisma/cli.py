"""Command-line interface: simulate, estimate, experiment, select-m."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .ecf import EcfConfig, estimate_ecf, select_block_size
from .harness import ExperimentConfig, run_experiment
from .model import ArfismaParams, SeasonalSpec
from .presets import get_preset
from .simulate import SimulationConfig, simulate
from .twostep import WhittleConfig, estimate_two_step


def _float_list(text: str) -> tuple:
    text = text.strip()
    if not text:
        return ()
    return tuple(float(v) for v in text.split(","))


def _add_model_args(p: argparse.ArgumentParser):
    p.add_argument("--model", type=int, default=None, help="built-in benchmark model 1-4")
    p.add_argument("--alpha", type=float, default=1.6)
    p.add_argument("--d", type=float, default=0.0)
    p.add_argument("--D", dest="D_", type=float, default=0.0, metavar="D")
    p.add_argument("--phi", type=_float_list, default=(), help="comma-separated AR coefficients")
    p.add_argument("--theta", type=_float_list, default=(), help="comma-separated MA coefficients")
    p.add_argument("--Phi", dest="Phi_", type=_float_list, default=(), metavar="PHI")
    p.add_argument("--Theta", dest="Theta_", type=_float_list, default=(), metavar="THETA")
    p.add_argument("--s", type=int, default=4, help="seasonal period")


def _add_spec_args(p: argparse.ArgumentParser):
    p.add_argument("--s", type=int, default=4)
    p.add_argument("--p", type=int, default=0)
    p.add_argument("--q", type=int, default=0)
    p.add_argument("--P", type=int, default=0)
    p.add_argument("--Q", type=int, default=0)


def _add_ecf_args(p: argparse.ArgumentParser):
    p.add_argument("--m", type=int, default=1, help="moving-block overlap")
    p.add_argument("--K", type=int, default=1024, help="integration node count")
    p.add_argument("--J-cf", dest="J_cf", type=int, default=5000)
    p.add_argument("--qmc", action="store_true", help="scrambled-Sobol integration nodes")
    p.add_argument(
        "--no-demean", dest="demean", action="store_false",
        help="skip sample-mean centering before block formation",
    )
    p.add_argument(
        "--tsm-warm-start", dest="tsm_warm_start", action="store_true",
        help="seed one optimizer start from a two-step fit",
    )
    p.add_argument("--restarts", type=int, default=3)
    p.add_argument("--maxfev", type=int, default=1500)


def _add_tsm_args(p: argparse.ArgumentParser):
    p.add_argument("--N", type=int, default=5000, help="MH frequency draws")
    p.add_argument("--burn-in", dest="burn_in", type=int, default=1000)
    p.add_argument("--proposal-scale", dest="proposal_scale", type=float, default=0.15 * np.pi)
    p.add_argument("--scheme", choices=("mh", "grid"), default="mh")


def _model_from_args(args) -> tuple[ArfismaParams, SeasonalSpec]:
    if args.model is not None:
        return get_preset(args.model)
    psi = ArfismaParams(
        alpha=args.alpha,
        d=args.d,
        D=args.D_,
        phi=args.phi,
        theta=args.theta,
        Phi=args.Phi_,
        Theta=args.Theta_,
    )
    spec = SeasonalSpec(
        s=args.s, p=len(psi.phi), q=len(psi.theta), P=len(psi.Phi), Q=len(psi.Theta)
    )
    return psi, spec


def _read_series(path: str) -> np.ndarray:
    fh = sys.stdin if path == "-" else open(path)
    try:
        values = []
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                values.append(float(line.split(",")[0]))
            except ValueError:
                continue  # column header
        return np.array(values)
    finally:
        if fh is not sys.stdin:
            fh.close()


def _write_text(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _cmd_simulate(args) -> int:
    psi, spec = _model_from_args(args)
    config = SimulationConfig(psi=psi, spec=spec, T=args.T, M=args.M, seed=args.seed)
    x = simulate(config)
    header = (
        f"# arfisma {__version__} simulate alpha={psi.alpha} d={psi.d} D={psi.D} "
        f"phi={list(psi.phi)} theta={list(psi.theta)} Phi={list(psi.Phi)} "
        f"Theta={list(psi.Theta)} s={spec.s} p={spec.p} q={spec.q} P={spec.P} "
        f"Q={spec.Q} T={args.T} M={args.M} seed={args.seed}\n"
    )
    body = "x\n" + "\n".join(format(v, ".17g") for v in x) + "\n"
    _write_text(args.out, header + body)
    return 0


def _cmd_estimate(args) -> int:
    series = _read_series(args.input)
    spec = SeasonalSpec(s=args.s, p=args.p, q=args.q, P=args.P, Q=args.Q)
    if args.method == "ecf":
        config = EcfConfig(
            m=args.m,
            K=args.K,
            J_cf=args.J_cf,
            integration_seed=args.seed,
            qmc=args.qmc,
            demean=args.demean,
            tsm_warm_start=args.tsm_warm_start,
            restarts=args.restarts,
            maxfev=args.maxfev,
        )
        report = estimate_ecf(series, spec, config)
    else:
        config = WhittleConfig(
            N=args.N,
            burn_in=args.burn_in,
            proposal_scale=args.proposal_scale,
            seed=args.seed,
            scheme=args.scheme,
        )
        report = estimate_two_step(series, spec, config)
    _write_text(args.out, json.dumps(report.to_dict(spec), indent=2) + "\n")
    return 0


def _cmd_experiment(args) -> int:
    psi, spec = _model_from_args(args)
    config = ExperimentConfig(
        psi0=psi,
        spec=spec,
        method=args.method,
        T=args.T,
        R=args.R,
        M=args.M,
        master_seed=args.seed,
        ecf=EcfConfig(
            m=args.m,
            K=args.K,
            J_cf=args.J_cf,
            qmc=args.qmc,
            demean=args.demean,
            tsm_warm_start=args.tsm_warm_start,
            restarts=args.restarts,
            maxfev=args.maxfev,
        ),
        whittle=WhittleConfig(
            N=args.N,
            burn_in=args.burn_in,
            proposal_scale=args.proposal_scale,
            scheme=args.scheme,
        ),
        model_id=args.model,
    )
    result = run_experiment(
        config, threads=args.threads, out_dir=args.out, progress=not args.quiet
    )
    if result.summary is not None:
        for n, t, m, r, a in zip(
            result.summary.names,
            result.summary.truth,
            result.summary.mean,
            result.summary.rmse,
            result.summary.mae,
        ):
            print(f"{n:>8s}  truth={t:+.4f}  mean={m:+.4f}  rmse={r:.4f}  mae={a:.4f}")
    print(
        f"completed {result.n_completed}/{config.R}, failed {result.n_failed}, "
        f"conforming={result.conforming}"
    )
    return 0 if result.conforming else 1


def _cmd_select_m(args) -> int:
    psi, spec = _model_from_args(args)
    grid = [int(v) for v in args.m_grid.split(",")]
    config = EcfConfig(K=args.K, J_cf=args.J_cf, qmc=args.qmc, restarts=args.restarts, maxfev=args.maxfev)
    m_opt, table = select_block_size(
        psi, spec, grid, R=args.R, T=args.T, config=config, master_seed=args.seed, M=args.M
    )
    payload = {
        "m_opt": m_opt,
        "table": {
            str(m): {
                "mse": row["mse"],
                "per_coord": None if row["per_coord"] is None else row["per_coord"].tolist(),
                "n_failed": row["n_failed"],
            }
            for m, row in table.items()
        },
    }
    _write_text(args.out, json.dumps(payload, indent=2) + "\n")
    return 0


def _apply_config_file(args: argparse.Namespace, path: str):
    """Key-value config file; entries override command-line flags."""
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line not of the form key = value: {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            dest = {"D": "D_", "Phi": "Phi_", "Theta": "Theta_"}.get(key, key.replace("-", "_"))
            if not hasattr(args, dest):
                raise ValueError(f"unknown config key {key!r}")
            current = getattr(args, dest)
            if isinstance(current, tuple):
                setattr(args, dest, _float_list(value))
            elif isinstance(current, bool):
                setattr(args, dest, value.lower() in ("1", "true", "yes", "on"))
            elif isinstance(current, int):
                setattr(args, dest, int(value))
            elif isinstance(current, float):
                setattr(args, dest, float(value))
            else:
                setattr(args, dest, value)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="arfisma",
        description="Simulate and estimate seasonal fractional ARIMA series with "
        "symmetric alpha-stable innovations.",
    )
    parser.add_argument("--version", action="version", version=f"arfisma {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="write one simulated path as CSV")
    _add_model_args(p_sim)
    p_sim.add_argument("--T", type=int, required=True)
    p_sim.add_argument("--M", type=int, default=5000)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--out", default=None)
    p_sim.add_argument("--config", default=None)
    p_sim.set_defaults(func=_cmd_simulate)

    p_est = sub.add_parser("estimate", help="fit parameters to a CSV series")
    p_est.add_argument("--input", required=True, help="CSV series path or - for stdin")
    p_est.add_argument("--method", choices=("ecf", "tsm"), default="ecf")
    _add_spec_args(p_est)
    _add_ecf_args(p_est)
    _add_tsm_args(p_est)
    p_est.add_argument("--seed", type=int, default=0)
    p_est.add_argument("--out", default=None)
    p_est.add_argument("--config", default=None)
    p_est.set_defaults(func=_cmd_estimate)

    p_exp = sub.add_parser("experiment", help="run a replicated simulation study")
    _add_model_args(p_exp)
    p_exp.add_argument("--method", choices=("ecf", "tsm"), default="ecf")
    p_exp.add_argument("--T", type=int, default=1500)
    p_exp.add_argument("--R", type=int, default=100)
    p_exp.add_argument("--M", type=int, default=5000)
    _add_ecf_args(p_exp)
    _add_tsm_args(p_exp)
    p_exp.add_argument("--seed", type=int, default=0)
    p_exp.add_argument("--threads", type=int, default=1)
    p_exp.add_argument("--out", default=None, help="output directory")
    p_exp.add_argument("--quiet", action="store_true")
    p_exp.add_argument("--config", default=None)
    p_exp.set_defaults(func=_cmd_experiment)

    p_sel = sub.add_parser("select-m", help="pick the MSE-minimizing block overlap")
    _add_model_args(p_sel)
    p_sel.add_argument("--m-grid", dest="m_grid", default="1,2,3,4,5,6,7,8")
    p_sel.add_argument("--T", type=int, default=1500)
    p_sel.add_argument("--R", type=int, default=20)
    p_sel.add_argument("--M", type=int, default=5000)
    p_sel.add_argument("--K", type=int, default=1024)
    p_sel.add_argument("--J-cf", dest="J_cf", type=int, default=5000)
    p_sel.add_argument("--qmc", action="store_true")
    p_sel.add_argument("--restarts", type=int, default=3)
    p_sel.add_argument("--maxfev", type=int, default=1200)
    p_sel.add_argument("--seed", type=int, default=0)
    p_sel.add_argument("--out", default=None)
    p_sel.add_argument("--config", default=None)
    p_sel.set_defaults(func=_cmd_select_m)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        _apply_config_file(args, args.config)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
