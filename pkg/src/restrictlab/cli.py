"""Experiment orchestration: validated configs in, deterministic CSV out.

Every experiment writes one CSV under the output root whose first line is a
'#'-prefixed JSON echo of the fully-defaulted config, then prints a JSON
summary to stdout.  Exit codes: 0 ok, 2 validation, 3 resource budget,
4 non-convergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import math

import numpy as np

from .errors import DomainError, NonConvergenceError, ResourceError

EXPERIMENTS = ("measure", "energy", "kernel", "hecke-returns", "amplifier",
               "integrals", "beta-scaling", "rapid-decay", "restrict", "kn",
               "theorem3", "exponents", "dyadic")

EXIT_OK, EXIT_VALIDATION, EXIT_RESOURCE, EXIT_NONCONVERGENCE = 0, 2, 3, 4


@dataclass
class ExperimentConfig:
    experiment: str
    params: dict = field(default_factory=dict)
    out: str = "results"
    seed: int = 0
    threads: int = 1

    def to_dict(self) -> dict:
        return {"experiment": self.experiment, "params": self.params,
                "out": self.out, "seed": self.seed, "threads": self.threads}


# per-experiment parameter schema: name -> (type, default or REQUIRED, validator)
_REQ = object()


def _positive(v):
    return v > 0


def _in_unit(v):
    return 0 < v <= 1


_SCHEMAS = {
    "measure": {"alpha": (float, 0.6309297535714574, _in_unit),
                "depth": (int, 6, lambda v: v >= 0),
                "r_min": (float, 1e-3, _positive), "r_max": (float, 1.0, _in_unit),
                "n_r": (int, 32, _positive)},
    "energy": {"alpha": (float, 0.6309297535714574, _in_unit),
               "depths": (list, [6, 8], None),
               "s_values": (list, [0.3, 0.55, 0.8], None)},
    "kernel": {"lambda": (float, 100.0, lambda v: v >= 10),
               "h_width": (float, 0.05, lambda v: 0 < v <= 0.05),
               "x_max": (float, 4.0, _positive)},
    "hecke-returns": {"a": (int, 2, _positive), "b": (int, 3, None),
                      "q": (int, 6, _positive),
                      "order_basis": (list, None, None),
                      "n_max": (int, 8, _positive),
                      "kappas": (list, [1.0, 0.5, 0.25, 0.125], None)},
    "amplifier": {"N": (int, 400, _positive), "q": (int, 1, _positive),
                  "draws": (int, 1000, _positive)},
    "integrals": {"lambda": (float, 100.0, lambda v: v >= 10),
                  "alpha": (float, 0.9, _in_unit),
                  "depth": (int, 8, lambda v: v >= 0),
                  "shear_t": (float, 0.0, None),
                  "resolution_per_wavelength": (int, 8, lambda v: v >= 8)},
    "beta-scaling": {"lambda": (float, 100.0, lambda v: v >= 10),
                     "alpha": (float, 0.9, lambda v: 0.5 < v <= 1),
                     "depth": (int, 8, lambda v: v >= 0),
                     "beta_exponents": (list, [0.3, 0.4, 0.5, 0.6], None),
                     "resolution_per_wavelength": (int, 8, lambda v: v >= 8)},
    "rapid-decay": {"lambda": (float, 100.0, lambda v: v >= 10),
                    "alpha": (float, 0.9, lambda v: 0.5 < v <= 1),
                    "depth": (int, 8, lambda v: v >= 0),
                    "beta_exponent": (float, 0.5, lambda v: 0 < v < 1),
                    "epsilon0": (float, 0.1, _positive),
                    "t_factors": (list, [0.0, 0.25, 0.5, 1.0, 2.0, 4.0], None),
                    "resolution_per_wavelength": (int, 8, lambda v: v >= 8)},
    "restrict": {"kind": (str, "highest_weight",
                          lambda v: v in ("zonal", "highest_weight")),
                 "degrees": (list, [64, 128, 256, 512], None),
                 "alpha": (float, 0.7, _in_unit),
                 "depth": (int, 8, lambda v: v >= 0)},
    "kn": {"kind": (str, "highest_weight",
                    lambda v: v in ("zonal", "highest_weight")),
           "degree": (int, 64, lambda v: 1 <= v <= 1000)},
    "theorem3": {"alpha": (float, 0.7, lambda v: 0.5 < v <= 1),
                 "degrees": (list, [64, 128, 256], None),
                 "depth": (int, 8, lambda v: v >= 0)},
    "exponents": {"n_alpha": (int, 100, lambda v: v >= 2)},
    "dyadic": {"lambda": (float, 128.0, lambda v: v >= 10),
               "alpha": (float, 0.7, _in_unit),
               "k_indices": (list, [-2, -1], None)},
}


def load_config(path: str = None, experiment: str = None, overrides: dict = None,
                out: str = "results", seed: int = 0, threads: int = 1) -> ExperimentConfig:
    """Build and validate a config from a JSON file and/or inline values.

    Inline overrides win over the file; defaults fill the rest and the full
    config is echoed in every artifact.
    """
    data = {}
    if path is not None:
        raw = Path(path).read_text()
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as e:
            raise DomainError(f"malformed config {path}: line {e.lineno}: {e.msg}")
        if not isinstance(data, dict):
            raise DomainError(f"config {path} must contain a JSON object")
    name = experiment or data.get("experiment")
    if name not in EXPERIMENTS:
        raise DomainError(f"unknown experiment {name!r}; choose from {EXPERIMENTS}")
    params = dict(data.get("params", {}))
    params.update(overrides or {})
    schema = _SCHEMAS[name]
    unknown = set(params) - set(schema)
    if unknown:
        raise DomainError(f"unknown parameter(s) {sorted(unknown)} for {name}")
    filled = {}
    for key, (typ, default, check) in schema.items():
        if key in params:
            if params[key] is None:
                val = None
            else:
                try:
                    val = typ(params[key]) if typ is not list else list(params[key])
                except (TypeError, ValueError):
                    raise DomainError(f"parameter {key!r} must have type {typ.__name__}")
        elif default is _REQ:
            raise DomainError(f"missing required parameter {key!r}")
        else:
            val = default
        if check is not None and not check(val):
            raise DomainError(f"parameter {key!r} = {val} violates its precondition")
        filled[key] = val
    return ExperimentConfig(name, filled,
                            out=str(data.get("out", out)),
                            seed=int(data.get("seed", seed)),
                            threads=int(data.get("threads", threads)))


def _fmt(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, float):
        return format(v, ".12g")
    if v is None:
        return ""
    return str(v)


def _write_csv(path: Path, cfg: ExperimentConfig, header: list[str], rows) -> None:
    tmp = path.with_suffix(".tmp")
    meta = cfg.to_dict()
    meta.pop("out")   # artifact bytes must not depend on where they land
    with tmp.open("w") as fh:
        fh.write("#" + json.dumps(meta, sort_keys=True) + "\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row.get(k) if isinstance(row, dict) else row[i])
                              for i, k in enumerate(header)) + "\n")
    tmp.replace(path)


def _measures_for(alpha: float, depth: int):
    from .measures import make_cantor_measure
    return make_cantor_measure(alpha, depth)


def _weight_for(alpha: float, depth: int, lam: float, spw: int = 8):
    from .frequency import BumpPair
    from .measures import build_weight, make_cantor_measure
    return build_weight(make_cantor_measure(alpha, depth), lam, BumpPair(),
                        samples_per_wavelength=spw)


def _run_measure(cfg, out_dir):
    from .measures import frostman_ratio, make_cantor_measure
    p = cfg.params
    m = make_cantor_measure(p["alpha"], p["depth"])
    rs = np.geomspace(p["r_min"], p["r_max"], p["n_r"])
    rows = [{"r": float(r), "sup_ratio": frostman_ratio(m, [r])} for r in rs]
    _write_csv(out_dir / "measure.csv", cfg, ["r", "sup_ratio"], rows)
    return {"sup_ratio_overall": max(r["sup_ratio"] for r in rows),
            "atoms": int(m.atoms.size)}


def _run_energy(cfg, out_dir):
    from .measures import energy, make_cantor_measure
    p = cfg.params
    rows = []
    for depth in p["depths"]:
        m = make_cantor_measure(p["alpha"], int(depth))
        for s in p["s_values"]:
            rows.append({"depth": depth, "s": s, "energy": energy(m, float(s))})
    _write_csv(out_dir / "energy.csv", cfg, ["depth", "s", "energy"], rows)
    ratios = {}
    for s in p["s_values"]:
        vals = [r["energy"] for r in rows if r["s"] == s]
        if len(vals) >= 2:
            ratios[str(s)] = vals[-1] / vals[0]
    return {"depth_ratios": ratios}


def _run_kernel(cfg, out_dir):
    from .spherical import kernel_decay_constant, make_kernel
    p = cfg.params
    k = make_kernel(p["lambda"], p["h_width"], p["x_max"])
    x = k.x_grid()
    rows = [{"x": float(xx), "k": float(vv)} for xx, vv in
            zip(x[::16], k.values[::16])]
    _write_csv(out_dir / "kernel.csv", cfg, ["x", "k"], rows)
    return {"k_at_0": float(k.values[0]), "decay_constant": kernel_decay_constant(k),
            "support_radius": k.support_radius, "verify_residual": k.verify_residual}


def _run_hecke_returns(cfg, out_dir):
    from fractions import Fraction

    from .geometry import GroupElement
    from .hecke import QuatAlgebra, hecke_returns
    p = cfg.params
    basis = p["order_basis"]
    if basis is not None:
        basis = [[Fraction(str(v)) for v in row] for row in basis]
    alg = QuatAlgebra(p["a"], p["b"], basis=basis, q=p["q"])
    g0 = GroupElement.identity()
    rows = []
    sup = 0.0
    for n in range(1, p["n_max"] + 1):
        for kappa in p["kappas"]:
            M = hecke_returns(alg, g0, n, float(kappa))
            shape = (n / kappa) ** 0.1 * (n * np.sqrt(kappa) + 1.0)
            rows.append({"n": n, "kappa": kappa, "M": M, "shape_ratio": M / shape})
            sup = max(sup, M / shape)
    _write_csv(out_dir / "hecke_returns.csv", cfg,
               ["n", "kappa", "M", "shape_ratio"], rows)
    return {"max_shape_ratio": sup}


def _run_amplifier(cfg, out_dir):
    from .hecke import build_amplifier, primes_up_to, random_hecke_eigenvalues
    p = cfg.params
    rng = np.random.default_rng(cfg.seed)
    n_primes = len([q for q in primes_up_to(int(math.isqrt(p["N"])))
                    if np.gcd(q, p["q"]) == 1])
    rows = []
    worst = np.inf
    for i in range(p["draws"]):
        eigs = random_hecke_eigenvalues(p["N"], rng)
        amp = build_amplifier(p["N"], eigs, q=p["q"])
        # the functional needs lambda(n) on the support; p and p^2 are stored
        val = abs(amp.eigenvalue_functional(eigs))
        worst = min(worst, val)
        if i < 32:
            rows.append({"draw": i, "functional": val, "l1": amp.moment_l1(),
                         "l2_sq": amp.moment_l2()})
    _write_csv(out_dir / "amplifier.csv", cfg, ["draw", "functional", "l1", "l2_sq"], rows)
    return {"n_primes": n_primes, "min_functional": worst,
            "bound": 0.5 * n_primes, "holds": bool(worst >= 0.5 * n_primes)}


def _run_integrals(cfg, out_dir):
    from .frequency import BumpPair
    from .geometry import GroupElement
    from .integrals import TestWindow, eval_I, modulated_gaussian
    from .sampling import SampledFunction
    from .spherical import make_kernel
    p = cfg.params
    lam = p["lambda"]
    w = _weight_for(p["alpha"], p["depth"], lam, p["resolution_per_wavelength"])
    kern = make_kernel(lam, x_max=1.0)
    h = w.grid_step
    n3 = int(round(6.0 / h))
    grid3 = -3.0 + h * np.arange(n3 + 1)
    wext = SampledFunction(w.grid_min, h, w.values).embed(-3.0, 3.0)
    phi = modulated_gaussian(grid3, lam)
    f = SampledFunction(-3.0, h, phi * wext.values.real)
    g = GroupElement.lower_shear(p["shear_t"])
    rep = eval_I(kern, TestWindow(), f, g, g_desc=f"shear({p['shear_t']})")
    _write_csv(out_dir / "integrals.csv", cfg,
               ["value_re", "value_im", "error", "lambda", "resolution",
                "converged", "g", "beta", "alpha"], [rep.to_row()])
    return {"value": [rep.value.real, rep.value.imag],
            "error": rep.error_estimate, "converged": rep.converged}


def _run_beta_scaling(cfg, out_dir):
    from .frequency import BumpPair
    from .integrals import TestWindow, beta_scaling_experiment
    from .spherical import make_kernel
    p = cfg.params
    lam = p["lambda"]
    bump = BumpPair()
    w = _weight_for(p["alpha"], p["depth"], lam, p["resolution_per_wavelength"])
    kern = make_kernel(lam, x_max=1.0)
    betas = [lam ** e for e in p["beta_exponents"]]
    rows, slope, norm_sq = beta_scaling_experiment(kern, TestWindow(), w, bump, betas)
    _write_csv(out_dir / "beta_scaling.csv", cfg,
               ["beta", "abs_I", "normalized", "error", "converged"], rows)
    return {"slope": slope, "target": -(p["alpha"] - 0.5) + 0.15,
            "phi_norm_sq": norm_sq,
            "slope_ok": bool(slope <= -(p["alpha"] - 0.5) + 0.15)}


def _run_rapid_decay(cfg, out_dir):
    from .frequency import BumpPair
    from .integrals import TestWindow, rapid_decay_experiment
    from .spherical import make_kernel
    p = cfg.params
    lam = p["lambda"]
    bump = BumpPair()
    w = _weight_for(p["alpha"], p["depth"], lam, p["resolution_per_wavelength"])
    kern = make_kernel(lam, x_max=1.0)
    beta = lam ** p["beta_exponent"]
    rows, contrast, t_star = rapid_decay_experiment(
        kern, TestWindow(), w, bump, beta, p["epsilon0"], tuple(p["t_factors"]))
    _write_csv(out_dir / "rapid_decay.csv", cfg,
               ["t", "factor", "dist_A", "abs_I", "error", "converged"], rows)
    return {"contrast": contrast, "threshold_t": t_star,
            "contrast_ok": bool(contrast <= 1e-3)}


def _run_restrict(cfg, out_dir):
    from .modes import (ModeSpec, SphereGeodesic, fit_exponent, make_mode,
                        restriction_norm)
    from .measures import make_cantor_measure
    p = cfg.params
    mu = make_cantor_measure(p["alpha"], p["depth"])
    ell = SphereGeodesic.equator() if p["kind"] == "highest_weight" \
        else SphereGeodesic.meridian()
    rows = []
    for l in p["degrees"]:
        mode = make_mode(ModeSpec("sphere", p["kind"], int(l)))
        rows.append({"degree": int(l), "lambda": mode.lam,
                     "norm": restriction_norm(mode, ell, mu)})
    _write_csv(out_dir / "restrict.csv", cfg, ["degree", "lambda", "norm"], rows)
    summary = {}
    if len(rows) >= 3:
        slope, resid = fit_exponent([(r["lambda"], r["norm"]) for r in rows])
        summary = {"fit_exponent": slope, "fit_residual": resid}
    return summary


def _run_kn(cfg, out_dir):
    from .modes import ModeSpec, kn_norm, make_mode
    p = cfg.params
    mode = make_mode(ModeSpec("sphere", p["kind"], p["degree"]))
    rep = kn_norm(mode)
    _write_csv(out_dir / "kn.csv", cfg,
               list(rep.to_row().keys()), [rep.to_row()])
    return {"s_kn": rep.s_kn, "lambda": rep.lam}


def _run_theorem3(cfg, out_dir):
    from .measures import make_cantor_measure
    from .modes import ModeSpec, make_mode, theorem_ratio_table
    p = cfg.params
    mu = make_cantor_measure(p["alpha"], p["depth"])
    modes = [make_mode(ModeSpec("sphere", "highest_weight", int(l)))
             for l in p["degrees"]]
    rows, spread = theorem_ratio_table(modes, mu, p["alpha"])
    _write_csv(out_dir / "theorem3.csv", cfg,
               ["lambda", "lhs", "skn", "bound", "ratio"], rows)
    return {"ratio_spread": spread, "spread_ok": bool(spread <= 4.0)}


def _run_exponents(cfg, out_dir):
    from .modes import exponent_table
    p = cfg.params
    n = p["n_alpha"]
    grid = [Fraction(2 * k, n) for k in range(1, n + 1)]
    rows = exponent_table(grid)
    _write_csv(out_dir / "exponents.csv", cfg,
               ["alpha", "gamma", "delta", "marshall"], rows)
    from .modes import delta_exponent
    return {"rows": len(rows), "delta_at_1": str(delta_exponent(Fraction(1)))}


def _run_dyadic(cfg, out_dir):
    from .modes import dyadic_kernel_check
    p = cfg.params
    lam = p["lambda"]
    w = _weight_for(p["alpha"], 6, lam)
    rows = []
    summaries = {}
    for k in p["k_indices"]:
        rep = dyadic_kernel_check(lam, int(k), w=w)
        for r in rep["rows"]:
            rows.append({"k_index": k, **r})
        summaries[str(k)] = {"sup_ratio": rep["sup_ratio"],
                             "decay_slope": rep["decay_slope"],
                             "weighted_ratio": rep.get("weighted_ratio"),
                             "any_flagged": rep["any_flagged"]}
    _write_csv(out_dir / "dyadic.csv", cfg,
               ["k_index", "s", "s_prime", "osc_scale", "abs_value", "model",
                "ratio", "flagged"], rows)
    return {"per_k": summaries}


# module operations each experiment invokes, echoed as provenance
_PROVENANCE = {
    "measure": ["measures.make_cantor_measure", "measures.frostman_ratio"],
    "energy": ["measures.make_cantor_measure", "measures.energy"],
    "kernel": ["spherical.make_kernel", "spherical.kernel_decay_constant"],
    "hecke-returns": ["hecke.enumerate_norm_n", "hecke.hecke_returns",
                      "geometry.dist_to_diag"],
    "amplifier": ["hecke.build_amplifier", "hecke.random_hecke_eigenvalues"],
    "integrals": ["measures.build_weight", "frequency.band_project",
                  "spherical.make_kernel", "integrals.eval_I"],
    "beta-scaling": ["measures.build_weight", "frequency.band_project",
                     "spherical.make_kernel", "integrals.beta_scaling_experiment"],
    "rapid-decay": ["measures.build_weight", "frequency.band_project",
                    "spherical.make_kernel", "integrals.rapid_decay_experiment"],
    "restrict": ["modes.make_mode", "modes.restriction_norm", "modes.fit_exponent"],
    "kn": ["modes.make_mode", "modes.kn_norm"],
    "theorem3": ["modes.make_mode", "modes.kn_norm", "modes.restriction_norm",
                 "modes.theorem3_check"],
    "exponents": ["modes.exponent_table"],
    "dyadic": ["measures.build_weight", "modes.dyadic_kernel_check"],
}

_RUNNERS = {
    "measure": _run_measure, "energy": _run_energy, "kernel": _run_kernel,
    "hecke-returns": _run_hecke_returns, "amplifier": _run_amplifier,
    "integrals": _run_integrals, "beta-scaling": _run_beta_scaling,
    "rapid-decay": _run_rapid_decay, "restrict": _run_restrict, "kn": _run_kn,
    "theorem3": _run_theorem3, "exponents": _run_exponents, "dyadic": _run_dyadic,
}


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Run one experiment; returns the machine-readable summary.

    Deterministic for a fixed (config, seed); partial artifacts are removed
    on failure (written to a temp file and renamed on success).
    """
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = _RUNNERS[cfg.experiment](cfg, out_dir)
    return {"experiment": cfg.experiment, "config": cfg.to_dict(),
            "ops": _PROVENANCE[cfg.experiment], "summary": summary}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="restrictlab",
        description="Run one of the restriction-estimate experiments.")
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", default=None, help="JSON config file")
    parser.add_argument("--out", default="results", help="output directory")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--param", "-p", action="append", default=[],
                        metavar="KEY=JSON", help="inline parameter override")
    args = parser.parse_args(argv)
    overrides = {}
    for kv in args.param:
        if "=" not in kv:
            print(f"error: --param needs KEY=JSON, got {kv!r}", file=sys.stderr)
            return EXIT_VALIDATION
        key, raw = kv.split("=", 1)
        try:
            overrides[key] = json.loads(raw)
        except json.JSONDecodeError:
            overrides[key] = raw
    try:
        cfg = load_config(args.config, args.experiment, overrides,
                          out=args.out, seed=args.seed, threads=args.threads)
        result = run_experiment(cfg)
    except DomainError as e:
        print(f"validation error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except ResourceError as e:
        print(f"resource error: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except NonConvergenceError as e:
        print(f"non-convergence: {e}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    print(json.dumps(result, sort_keys=True, default=_fmt))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
