"""Command-line entry point: ``relusat <subcommand> [flags]``.

Exit codes: 0 success, 1 invalid configuration, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__

FORMAT_VERSION = f"relusat/{__version__}"
SUBCOMMANDS = ("coeffs", "cutoff", "points", "qmat", "localize", "approx", "rate", "verify")

log = logging.getLogger("relusat")


class ConfigError(ValueError):
    pass


class NumericalError(RuntimeError):
    pass


@dataclass
class RunConfig:
    subcommand: str
    d: int = 2
    k: int = 1
    r: float | None = None
    n: int | None = None
    n_min: int = 32
    n_max: int = 1024
    n_factor: int = 2
    seed: int = 1
    seeds: int = 1
    max_degree: int = 100
    q: int = 8
    q_min: int | None = None
    q_max: int | None = None
    grid_size: int = 4001
    pool_factor: int = 50
    mesh_samples: int | None = None
    rcond: float = 1e-12
    restrict_index_set: bool = True
    fit_skip: int = 2
    m_f: int = 2048
    suite: str = "all"
    out: str | None = None
    json: str | None = None
    dump_dir: str | None = None
    verbosity: int = 0
    extra: dict = field(default_factory=dict, repr=False)

    def validate(self) -> "RunConfig":
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigError(f"unknown subcommand {self.subcommand!r}")
        if self.d < 2:
            raise ConfigError("d must be ≥ 2")
        if self.k < 0:
            raise ConfigError("k must be ≥ 0")
        if not 0 < self.rcond < 1:
            raise ConfigError("rcond must lie in (0, 1)")
        if self.subcommand in ("points", "qmat", "approx") and self.n is None:
            raise ConfigError(f"missing required flag --n for {self.subcommand}")
        if self.n is not None and self.n < self.d + 2:
            raise ConfigError(f"n must be ≥ d+2 = {self.d + 2}")
        if self.subcommand == "rate":
            if self.n_min < self.d + 2:
                raise ConfigError(f"n-min must be ≥ d+2 = {self.d + 2}")
            if self.n_max < self.n_min or self.n_factor < 2:
                raise ConfigError("need n-max ≥ n-min and n-factor ≥ 2")
        if self.subcommand in ("approx", "rate") and self.r is None:
            raise ConfigError(f"missing required flag --r for {self.subcommand}")
        if self.r is not None and self.r <= 0:
            raise ConfigError("r must be > 0")
        if self.seeds < 1:
            raise ConfigError("seeds must be ≥ 1")
        if self.max_degree < self.k + 2:
            raise ConfigError("max-degree must be ≥ k+2")
        return self

    def effective(self) -> dict:
        out = asdict(self)
        out.pop("extra")
        return out


_TYPES = {
    "d": int, "k": int, "r": float, "n": int, "n_min": int, "n_max": int, "n_factor": int,
    "seed": int, "seeds": int, "max_degree": int, "q": int, "q_min": int, "q_max": int,
    "grid_size": int, "pool_factor": int, "mesh_samples": int, "rcond": float,
    "restrict_index_set": "bool", "fit_skip": int, "m_f": int, "suite": str, "out": str,
    "json": str, "dump_dir": str, "verbosity": int,
}


def _parse_bool(v: str) -> bool:
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {v!r}")


def _convert(key: str, value):
    typ = _TYPES[key]
    try:
        return _parse_bool(value) if typ == "bool" else typ(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid value for {key}: {value!r}") from exc


def read_config_file(path) -> dict:
    """Flat ``key = value`` text; '#' starts a comment; dashes in keys map to underscores."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _TYPES:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = _convert(key, value)
    return values


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _add(p, *names, **kw):
    kw.setdefault("default", argparse.SUPPRESS)
    p.add_argument(*names, **kw)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="relusat", description="Saturation laboratory for linearized ReLU^k networks on S^d.")
    parser.add_argument("--version", action="version", version=FORMAT_VERSION)
    sub = parser.add_subparsers(dest="subcommand", parser_class=_Parser)

    def common(p, *, out=True):
        _add(p, "--config", type=str, help="key = value file; flags override it")
        _add(p, "-v", "--verbose", dest="verbosity", action="count")
        _add(p, "--d", type=int)
        _add(p, "--k", type=int)
        if out:
            _add(p, "--out", type=str, help="output path (default: stdout)")

    p = sub.add_parser("coeffs", help="activation Legendre spectrum as CSV")
    common(p)
    _add(p, "--max-degree", dest="max_degree", type=int)

    p = sub.add_parser("cutoff", help="sample zeta and phi_q as CSV")
    common(p)
    _add(p, "--q", type=int)
    _add(p, "--grid-size", dest="grid_size", type=int)

    p = sub.add_parser("points", help="antipodally quasi-uniform points")
    common(p)
    _add(p, "--n", type=int)
    _add(p, "--seed", type=int)
    _add(p, "--pool-factor", dest="pool_factor", type=int)
    _add(p, "--mesh-samples", dest="mesh_samples", type=int)
    _add(p, "--json", type=str, help="uniformity report path")

    p = sub.add_parser("qmat", help="dyadic block dominance certificates")
    common(p)
    _add(p, "--n", type=int)
    _add(p, "--seed", type=int)
    _add(p, "--q-min", dest="q_min", type=int)
    _add(p, "--q-max", dest="q_max", type=int)
    _add(p, "--dump-dir", dest="dump_dir", type=str, help="write each Q_q as row-major CSV here")

    p = sub.add_parser("localize", help="|L_q(cos theta)| profile and decay fit")
    common(p)
    _add(p, "--q", type=int)
    _add(p, "--grid-size", dest="grid_size", type=int)

    p = sub.add_parser("approx", help="best approximation for one point set")
    common(p)
    _add(p, "--r", type=float)
    _add(p, "--n", type=int)
    _add(p, "--seed", type=int)
    _add(p, "--rcond", type=float)
    _add(p, "--m-f", dest="m_f", type=int)
    _add(p, "--restrict-index-set", dest="restrict_index_set", type=_parse_bool, nargs="?", const=True)

    p = sub.add_parser("rate", help="rate sweep over n")
    common(p)
    _add(p, "--r", type=float)
    _add(p, "--n-min", dest="n_min", type=int)
    _add(p, "--n-max", dest="n_max", type=int)
    _add(p, "--n-factor", dest="n_factor", type=int)
    _add(p, "--seeds", type=int)
    _add(p, "--rcond", type=float)
    _add(p, "--m-f", dest="m_f", type=int)
    _add(p, "--restrict-index-set", dest="restrict_index_set", type=_parse_bool, nargs="?", const=True)
    _add(p, "--fit-skip", dest="fit_skip", type=int)
    _add(p, "--json", type=str, help="full report path")

    p = sub.add_parser("verify", help="run invariant suites")
    common(p, out=False)
    _add(p, "--suite", type=str)
    return parser


def parse_config(argv=None, config_file=None) -> RunConfig:
    """Merge defaults < config file < flags into a validated RunConfig."""
    ns = vars(build_parser().parse_args(argv))
    sub = ns.pop("subcommand", None)
    if sub is None:
        raise ConfigError("missing subcommand; choose one of " + ", ".join(SUBCOMMANDS))
    values = {}
    path = ns.pop("config", None) or config_file
    if path:
        values.update(read_config_file(path))
    values.update(ns)
    return RunConfig(subcommand=sub, **values).validate()


# drivers -------------------------------------------------------------------


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _write_csv(cfg: RunConfig, header, rows, path=None):
    fh, close = _open_out(path if path is not None else cfg.out)
    try:
        fh.write(f"# {FORMAT_VERSION} config={json.dumps(cfg.effective(), sort_keys=True)}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_num(v) for v in row])
    finally:
        if close:
            fh.close()


def _num(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    return repr(float(v))


def _write_json(cfg: RunConfig, payload: dict, path):
    doc = {"format_version": FORMAT_VERSION, "config": cfg.effective(), **payload}
    text = json.dumps(doc, indent=2, sort_keys=False, default=_json_default)
    if path in (None, "-"):
        sys.stdout.write(text + "\n")
    else:
        Path(path).write_text(text + "\n")


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


def _cmd_coeffs(cfg):
    from .activation import coefficient_rows

    rows = coefficient_rows(cfg.d, cfg.k, cfg.max_degree)
    _write_csv(cfg, ["m", "in_index_set", "sigma_hat", "xi", "abs_rel_gap_closedform_vs_quadrature"], rows)


def _cmd_cutoff(cfg):
    from .cutoff import phi_eval, zeta_eval

    t = np.linspace(0.0, 2.5, cfg.grid_size)
    z = zeta_eval(t)
    phi = phi_eval(cfg.q, cfg.d, cfg.k, t)
    _write_csv(cfg, ["t", "zeta", f"phi_{cfg.q}"], zip(t, z, phi))


def _points(cfg):
    from .sphere_points import generate_antipodal_quasiuniform

    return generate_antipodal_quasiuniform(cfg.d, cfg.n, cfg.seed, pool_factor=cfg.pool_factor)


def _cmd_points(cfg):
    from .sphere_points import certify_uniformity

    ps = _points(cfg)
    rep = certify_uniformity(ps, cfg.mesh_samples, seed=cfg.seed)
    cols = [f"x{i}" for i in range(cfg.d + 1)]
    _write_csv(cfg, cols, ps.points)
    if cfg.json:
        _write_json(cfg, {"uniformity": rep.as_dict()}, cfg.json)
    log.info("n=%d h=%.4g mesh=%.4g ratio=%.3f", ps.n, rep.separation, rep.mesh_norm, rep.mesh_ratio)


def _cmd_qmat(cfg):
    from .kernel_matrices import assemble_dyadic_blocks, certify_dominance
    from .sphere_points import certify_uniformity, kappa_threshold

    ps = _points(cfg)
    rep = certify_uniformity(ps, cfg.mesh_samples, seed=cfg.seed)
    q_min = cfg.q_min if cfg.q_min is not None else max(0, kappa_threshold(rep, 1.0))
    q_max = cfg.q_max if cfg.q_max is not None else q_min + 4
    certs = []
    for block in assemble_dyadic_blocks(ps, range(q_min, q_max + 1), cfg.d, cfg.k):
        cert = certify_dominance(block)
        certs.append(cert.as_dict() | {"degree_range": list(block.degree_range)})
        if cfg.dump_dir:
            Path(cfg.dump_dir).mkdir(parents=True, exist_ok=True)
            _write_csv(cfg, [f"c{j}" for j in range(ps.n)], block.matrix, Path(cfg.dump_dir) / f"Q_{block.q}.csv")
    _write_json(cfg, {"uniformity": rep.as_dict(), "certificates": certs}, cfg.out)


def _cmd_localize(cfg):
    from .kernel_matrices import localization_profile

    grid = np.linspace(0, np.pi, cfg.grid_size + 2)[1:-1]
    prof = localization_profile(cfg.q, cfg.d, cfg.k, grid)
    fit = prof.L_one * prof.amplitude * (1 + 2.0**cfg.q * np.sin(prof.theta)) ** prof.slope
    _write_csv(cfg, ["theta", "abs_Lq", "envelope_fit"], zip(prof.theta, prof.abs_L, fit))
    log.info("q=%d fitted slope %.3f over %d points", cfg.q, prof.slope, prof.fit_points)


def _cmd_approx(cfg):
    from .activation import build_table
    from .approximation import assemble_gram, best_approx_error, low_degree_energy, make_sobolev_target
    from .kernel_matrices import assemble_dyadic_block, find_dominant_level
    from .sphere_points import certify_uniformity

    ps = _points(cfg)
    rep = certify_uniformity(ps, cfg.mesh_samples, seed=cfg.seed)
    table = build_table(cfg.d, cfg.k, max(cfg.m_f, cfg.k + 2))
    target = make_sobolev_target(cfg.d, cfg.k, cfg.r, cfg.m_f, restrict_to_index_set=cfg.restrict_index_set)
    gs = assemble_gram(ps, table, target)
    res = best_approx_error(gs, rcond=cfg.rcond)
    if res.ill_conditioned:
        raise NumericalError(f"ill-conditioned Gram system: {res.dropped_modes} of {res.n} modes dropped")
    scan = find_dominant_level(ps, cfg.k, rep)
    payload = {"n": ps.n, "error": res.error, "norm_f": res.norm_f, "dropped_modes": res.dropped_modes}
    if scan.q_found is not None:
        cutoff = 2 ** (scan.q_found - 1)
        lo, hi = low_degree_energy(res.a, ps, table, cutoff, total=float(res.a @ gs.G @ res.a))
        qa = assemble_dyadic_block(ps, scan.q_found, cfg.d, cfg.k).quadform(res.a)
        payload |= {"kappa": scan.q_found, "cutoff_degree": cutoff, "low_energy": lo, "high_energy": hi, "q_kappa_quadform": qa}
    else:
        payload |= {"kappa": None, "low_energy": None, "high_energy": None, "q_kappa_quadform": None}
    _write_json(cfg, payload, cfg.out)


def _cmd_rate(cfg):
    from .experiments import run_rate_sweep

    n_list = []
    n = cfg.n_min
    while n <= cfg.n_max:
        n_list.append(n)
        n *= cfg.n_factor
    report = run_rate_sweep(
        cfg.d, cfg.k, cfg.r, n_list, seeds=range(1, cfg.seeds + 1), restrict=cfg.restrict_index_set,
        M_f=cfg.m_f, rcond=cfg.rcond, fit_skip=cfg.fit_skip,
    )
    _write_csv(
        cfg,
        ["n", "h_underline", "kappa", "error", "err_scaled_saturation", "err_scaled_sobolev", "lower_bound_rhs"],
        ([row.n, row.h_underline, row.kappa, row.error, row.err_scaled_saturation, row.err_scaled_sobolev,
          row.lower_bound_rhs] for row in report.rows),
    )
    if cfg.json:
        _write_json(cfg, {"report": report.to_json()}, cfg.json)
    for note in report.notes:
        log.warning(note)
    log.info("slope %.4f +- %.4f, plateau ratio %.3f", report.fitted_slope, report.slope_stderr, report.plateau_ratio)
    if any(not r.ok for r in report.runs):
        raise NumericalError("; ".join(f"n={r.n} seed={r.seed}: {r.failure}" for r in report.runs if not r.ok))


def _cmd_verify(cfg):
    from .verify import run_suites

    names = [s.strip() for s in cfg.suite.split(",")]
    failed = 0
    try:
        for suite, label, ok in run_suites(names):
            print(f"{'PASS' if ok else 'FAIL'}  {suite:16s} {label}")
            failed += not ok
    except KeyError as exc:
        raise ConfigError(f"unknown suite {exc.args[0]!r}") from exc
    print(f"{'all checks passed' if not failed else f'{failed} check(s) failed'}")
    return 0 if not failed else 2


DRIVERS = {
    "coeffs": _cmd_coeffs,
    "cutoff": _cmd_cutoff,
    "points": _cmd_points,
    "qmat": _cmd_qmat,
    "localize": _cmd_localize,
    "approx": _cmd_approx,
    "rate": _cmd_rate,
    "verify": _cmd_verify,
}


def run(cfg: RunConfig) -> int:
    from .kernel_matrices import NumericalFailure

    try:
        code = DRIVERS[cfg.subcommand](cfg)
    except (NumericalError, NumericalFailure) as exc:
        print(f"relusat: numerical failure: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"relusat: {exc}", file=sys.stderr)
        return 1
    return code or 0


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"usage: relusat {{{','.join(SUBCOMMANDS)}}} [flags]\nrelusat: error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"relusat: error: {exc}", file=sys.stderr)
        return 1
    level = logging.WARNING - 10 * min(cfg.verbosity, 2)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(name)s: %(message)s")
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
