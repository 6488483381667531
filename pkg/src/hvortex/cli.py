"""vortexctl: command-line driver for the vortex laboratory.

Subcommands map one-to-one onto the library pipelines; every run writes
its artifacts (CSV with 18 significant digits, JSON reports, SVG
figures) into an output directory together with a manifest.json that
records the resolved inputs, library versions, output hashes, and wall
time — enough to re-run the job byte-for-byte.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from . import __version__
from .grid import RadialGrid, ComplexRadialField, h1m_norm
from .vortex import solve_profile, profile_asymptotics
from .linops import PotentialTable
from .spectra import (
    gap_eigenvalues_RQ,
    resonance_test_RQ,
    fundamental_system_H,
    fundamental_asymptotics,
)
from .gauge import darboux_forward, reconstruct_epsilon
from .evolve import EvolutionConfig, evolve, gaussian_bump_data
from .lemmas import run_lemma_suite
from .verify import VerifyParams, run_all


class ConfigError(Exception):
    pass


# defaults, also the schema: unknown sections/keys are rejected
SCHEMA = {
    "grid": {"rmax": 30.0, "n": 6000},
    "vortex": {"m": 1, "tol": 1e-8},
    "evolve": {"dt": 0.01, "T": 10.0, "delta": 1e-3,
               "formulation": "direct", "sponge": True},
    "spectra": {"eta": 1e-3},
    "lemmalab": {"samples": 200, "amplitude": 1e-3, "seed": 0},
}

_FLAG_DEST = {
    "m": ("vortex", "m"),
    "rmax": ("grid", "rmax"),
    "n": ("grid", "n"),
    "dt": ("evolve", "dt"),
    "T": ("evolve", "T"),
    "delta": ("evolve", "delta"),
    "tol": ("vortex", "tol"),
    "seed": ("lemmalab", "seed"),
}


def load_config(path: str | None, args: argparse.Namespace) -> dict:
    """Merge defaults <- config file <- command-line flags, validated."""
    cfg = {sec: dict(vals) for sec, vals in SCHEMA.items()}
    if path is not None:
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise ConfigError(f"config file not found: {path}")
        for sec in parser.sections():
            if sec not in SCHEMA:
                raise ConfigError(f"unknown config section [{sec}]")
            for key, raw in parser[sec].items():
                if key not in SCHEMA[sec]:
                    raise ConfigError(f"unknown key '{key}' in [{sec}]")
                kind = type(SCHEMA[sec][key])
                try:
                    cfg[sec][key] = (raw.lower() in ("1", "true", "yes")
                                     if kind is bool else kind(raw))
                except ValueError as exc:
                    raise ConfigError(f"bad value for {sec}.{key}: {raw}"
                                      ) from exc
    for flag, (sec, key) in _FLAG_DEST.items():
        val = getattr(args, flag, None)
        if val is not None:
            cfg[sec][key] = val
    validate(cfg)
    return cfg


def validate(cfg: dict):
    g, v, e = cfg["grid"], cfg["vortex"], cfg["evolve"]
    if not (1 <= v["m"] <= 5):
        raise ConfigError("m must be in 1..5")
    if not (5.0 <= g["rmax"] <= 100.0):
        raise ConfigError("rmax must be in [5, 100]")
    if not (100 <= g["n"] <= 200000):
        raise ConfigError("n must be in [100, 200000]")
    if not (0.0 < e["dt"] <= 1.0 and 0.0 < e["T"] <= 1000.0):
        raise ConfigError("need 0 < dt <= 1 and 0 < T <= 1000")
    if not (0.0 < e["delta"] <= 0.1):
        raise ConfigError("delta must be in (0, 0.1]")
    if e["formulation"] not in ("direct", "ll", "eps1"):
        raise ConfigError("formulation must be direct, ll, or eps1")
    if not (0.0 < v["tol"] <= 1e-4):
        raise ConfigError("tol must be in (0, 1e-4]")


# ------------------------------------------------------------------ output

def _write(out_dir: Path, name: str, text: str) -> Path:
    path = out_dir / name
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
    return path


def _finish(out_dir: Path, cfg: dict, command: str, t0: float,
            extra_files: list[Path]) -> None:
    import scipy

    hashes = {}
    for path in sorted(out_dir.iterdir()):
        if path.name == "manifest.json" or not path.is_file():
            continue
        hashes[path.name] = hashlib.sha256(path.read_bytes()).hexdigest()
    manifest = {
        "command": command,
        "inputs": cfg,
        "versions": {
            "hvortex": __version__,
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "outputs_sha256": hashes,
        "wall_seconds": time.perf_counter() - t0,
    }
    _write(out_dir, "manifest.json",
           json.dumps(manifest, indent=2, sort_keys=True))


def _figure(out_dir: Path, name: str, draw) -> Path:
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    draw(ax)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    path = out_dir / name
    fig.savefig(path)
    plt.close(fig)
    return path


# ---------------------------------------------------------------- commands

def cmd_profile(cfg: dict, out_dir: Path) -> int:
    g = RadialGrid(cfg["grid"]["rmax"], cfg["grid"]["n"])
    p = solve_profile(cfg["vortex"]["m"], g, tol=cfg["vortex"]["tol"])
    _write(out_dir, "profile.csv", p.to_csv())
    _write(out_dir, "asymptotics.json",
           json.dumps(profile_asymptotics(p), indent=2, sort_keys=True))

    def draw(ax):
        ax.plot(g.r, p.Q, label="Q")
        ax.plot(g.r, p.Atheta, label=r"$A_\theta$")
        ax.set_xlabel("r")
        ax.set_title(f"vortex profile, m = {p.m}")
        ax.legend()

    _figure(out_dir, "profile.svg", draw)
    return 0


def cmd_spectrum(cfg: dict, out_dir: Path) -> int:
    g = RadialGrid(cfg["grid"]["rmax"], cfg["grid"]["n"])
    p = solve_profile(cfg["vortex"]["m"], g, tol=cfg["vortex"]["tol"])
    eta = cfg["spectra"]["eta"]
    gap = gap_eigenvalues_RQ(p, eta=eta)
    res = resonance_test_RQ(p)
    _write(out_dir, "gap.json", gap.to_json())
    _write(out_dir, "resonance.json", res.to_json())
    table = PotentialTable.from_profile(p)
    _write(out_dir, "potentials.csv", table.to_csv())

    def draw(ax):
        ax.plot(g.r, table.V_RQ, label=r"$V_{R_Q}$")
        ax.plot(g.r, table.V_H, label=r"$V_H$ (half line)")
        ax.axhline(1.25, color="k", ls=":", lw=0.8,
                   label="essential spectrum")
        ax.set_xlim(0, min(10.0, g.r_max))
        ax.set_ylim(-1, 6)
        ax.set_xlabel("r")
        ax.set_title(f"potentials, m = {p.m}")
        ax.legend()

    _figure(out_dir, "potentials.svg", draw)
    return 0


def cmd_green(cfg: dict, out_dir: Path) -> int:
    g = RadialGrid(cfg["grid"]["rmax"], cfg["grid"]["n"])
    p = solve_profile(cfg["vortex"]["m"], g, tol=cfg["vortex"]["tol"])
    fs = fundamental_system_H(p)
    _write(out_dir, "fundamental.csv", fs.to_csv())
    report = fundamental_asymptotics(fs, p.m)
    report["wronskian"] = fs.wronskian
    report["wronskian_rel_stdev"] = fs.wronskian_rel_stdev
    _write(out_dir, "green.json",
           json.dumps(report, indent=2, sort_keys=True))

    def draw(ax):
        ax.semilogy(g.r, np.abs(fs.phi0), label=r"$|\varphi_0|$")
        ax.semilogy(g.r, np.abs(fs.phiInf), label=r"$|\varphi_\infty|$")
        ax.set_xlabel("r")
        ax.set_title("fundamental system of H")
        ax.legend()

    _figure(out_dir, "fundamental.svg", draw)
    return 0


def cmd_reconstruct(cfg: dict, out_dir: Path) -> int:
    g = RadialGrid(cfg["grid"]["rmax"], cfg["grid"]["n"])
    p = solve_profile(cfg["vortex"]["m"], g, tol=cfg["vortex"]["tol"])
    delta = cfg["evolve"]["delta"]
    raw = delta * p.Q * np.exp(-((g.r - 3.0) ** 2)) + 0j
    eps_star = ComplexRadialField(g, raw, p.m)
    eps1 = darboux_forward(eps_star, p)
    result = reconstruct_epsilon(eps1, p)
    err = h1m_norm(ComplexRadialField(
        g, result.eps.values - eps_star.values, p.m))
    _write(out_dir, "roundtrip.json", json.dumps(
        {"h1m_error": err, "iterations": result.iterations,
         "converged": result.converged,
         "update_norms": result.update_norms}, indent=2))
    buf = ["r,eps_star_re,eps1_re,eps1_im,eps_rec_re"]
    for i in range(g.n):
        buf.append(",".join(f"{x:.17e}" for x in (
            g.r[i], raw[i].real, eps1.values[i].real,
            eps1.values[i].imag, result.eps.values[i].real)))
    _write(out_dir, "fields.csv", "\n".join(buf) + "\n")

    def draw(ax):
        ax.plot(g.r, raw.real, label=r"$\varepsilon^\ast$")
        ax.plot(g.r, result.eps.values.real, "--",
                label="reconstructed")
        ax.set_xlim(0, min(12.0, g.r_max))
        ax.set_xlabel("r")
        ax.set_title(f"round trip, H1m error = {err:.2e}")
        ax.legend()

    _figure(out_dir, "roundtrip.svg", draw)
    return 0


def cmd_evolve(cfg: dict, out_dir: Path) -> int:
    g = RadialGrid(cfg["grid"]["rmax"], cfg["grid"]["n"])
    p = solve_profile(cfg["vortex"]["m"], g, tol=cfg["vortex"]["tol"])
    e = cfg["evolve"]
    eps0 = gaussian_bump_data(p, e["delta"])
    config = EvolutionConfig(dt=e["dt"], T=e["T"],
                             formulation=e["formulation"],
                             sponge=e["sponge"])
    _, trace = evolve(eps0, p, config)
    _write(out_dir, "trace.csv", trace.to_csv())
    _write(out_dir, "summary.json", trace.summary_json())

    def draw(ax):
        ax.semilogy(trace.times, trace.h1m, label=r"$\|\varepsilon\|_{H^1_m}$")
        ax.semilogy(trace.times, trace.eps1_l2,
                    label=r"$\|\varepsilon_1\|_{L^2}$")
        ax.set_xlabel("t")
        ax.set_title(f"{e['formulation']} evolution, delta = {e['delta']:g}")
        ax.legend()

    _figure(out_dir, "trace.svg", draw)
    return 3 if trace.blew_up else 0


def cmd_lemmas(cfg: dict, out_dir: Path) -> int:
    g = RadialGrid(cfg["grid"]["rmax"], cfg["grid"]["n"])
    p = solve_profile(cfg["vortex"]["m"], g, tol=cfg["vortex"]["tol"])
    pf = solve_profile(cfg["vortex"]["m"],
                       RadialGrid(g.r_max, 2 * g.n),
                       tol=cfg["vortex"]["tol"])
    lab = cfg["lemmalab"]
    reports = run_lemma_suite(p, n_samples=lab["samples"],
                              amplitude=lab["amplitude"],
                              seed=lab["seed"], profile_fine=pf)
    for i, rep in enumerate(reports):
        name = f"lemma_{i:02d}_{rep['lemma']}.json"
        _write(out_dir, name, json.dumps(rep, indent=2, sort_keys=True))

    def draw(ax):
        labels = [f"{r['lemma']}\n{r.get('exponents', '')}"
                  for r in reports]
        ax.bar(range(len(reports)),
               [r["worst_ratio"] for r in reports])
        ax.set_xticks(range(len(reports)))
        ax.set_xticklabels(labels, fontsize=5, rotation=45)
        ax.set_ylabel("worst LHS/RHS ratio")
        ax.set_title(f"inequality suite, {lab['samples']} samples")

    _figure(out_dir, "lemmas.svg", draw)
    return 0


def cmd_verify_all(cfg: dict, out_dir: Path, quick: bool) -> int:
    params = VerifyParams.quick_params() if quick else VerifyParams()
    params.seed = cfg["lemmalab"]["seed"]
    results = run_all(params)
    lines = [r.line() for r in results]
    n_pass = sum(r.passed for r in results)
    lines.append(f"{n_pass}/{len(results)} checks passed")
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    _write(out_dir, "verify.txt", text)
    _write(out_dir, "verify.json", json.dumps(
        [{"index": r.index, "name": r.name, "passed": r.passed,
          "detail": r.detail, "seconds": r.seconds} for r in results],
        indent=2))
    return 0 if n_pass == len(results) else 3


# ------------------------------------------------------------------ driver

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="vortexctl",
        description="hyperbolic vortex laboratory driver")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("profile", "spectrum", "green", "reconstruct",
                 "evolve", "lemmas", "verify-all"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=str, default=None)
        sp.add_argument("--m", type=int, default=None)
        sp.add_argument("--rmax", type=float, default=None)
        sp.add_argument("--n", type=int, default=None)
        sp.add_argument("--dt", type=float, default=None)
        sp.add_argument("--T", type=float, default=None)
        sp.add_argument("--delta", type=float, default=None)
        sp.add_argument("--tol", type=float, default=None)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", type=str, default=None)
        sp.add_argument("--quick", action="store_true")
    return ap


_DISPATCH = {
    "profile": cmd_profile,
    "spectrum": cmd_spectrum,
    "green": cmd_green,
    "reconstruct": cmd_reconstruct,
    "evolve": cmd_evolve,
    "lemmas": cmd_lemmas,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args)
        if args.quick and args.command == "verify-all":
            pass  # quick is consumed by the verify parameters
        elif args.quick:
            cfg["grid"]["rmax"] = min(cfg["grid"]["rmax"], 20.0)
            cfg["grid"]["n"] = min(cfg["grid"]["n"], 2000)
            cfg["evolve"]["T"] = min(cfg["evolve"]["T"], 10.0)
    except ConfigError as exc:
        print(f"vortexctl: invalid configuration: {exc}", file=sys.stderr)
        return 2
    out_dir = Path(args.out or f"vortexctl-{args.command}")
    out_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    try:
        if args.command == "verify-all":
            code = cmd_verify_all(cfg, out_dir, args.quick)
        else:
            code = _DISPATCH[args.command](cfg, out_dir)
    except (RuntimeError, ValueError, FloatingPointError,
            np.linalg.LinAlgError) as exc:
        print(f"vortexctl: numerical failure: {exc}", file=sys.stderr)
        return 3
    _finish(out_dir, cfg, args.command, t0, [])
    return code


if __name__ == "__main__":
    sys.exit(main())
