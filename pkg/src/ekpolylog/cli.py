"""Command-line front end: expand, eisenstein, padic and verify.

Every command emits a report {command, params, results[], ledger, version}; JSON output is
deterministic (sorted keys, no timestamps unless --timing is given).

Exit codes: 0 success, 1 verification failure, 2 configuration error, 3 precision exhausted.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path

from . import __version__
from .errors import ConfigError, DomainError, EKError, PoleError, PrecisionError

CACHE_ENV = "EKPOLYLOG_CACHE_DIR"
COMMAND_KEYS = {
    "expand": {"what", "n", "order", "orders"},
    "eisenstein": {"a", "b", "z0", "numeric_only", "exact_only", "dps"},
    "padic": {"p", "pi", "z0", "table", "moment", "ehat", "smoke", "padic_order", "precision", "mmax"},
    "verify": {"suite"},
}
SLACK_SCHEDULE = (16, 32, 64)
EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_PRECISION = 0, 1, 2, 3


# ---------------------------------------------------------------------------
# Configuration and cache
# ---------------------------------------------------------------------------


@dataclass
class RunConfig:
    command: str
    curve: str = "gauss"
    presets: str | None = None
    p: int | None = None
    pi: str | None = None
    z0: str = "lattice"
    what: str = "sigma"
    n: int = 2
    order: int = 12
    orders: str = "4,4"
    a: int = 0
    b: int = 0
    numeric_only: bool = False
    exact_only: bool = False
    dps: int = 30
    table: int | None = None
    moment: list = field(default_factory=list)
    ehat: list = field(default_factory=list)
    smoke: bool = False
    padic_order: int | None = None
    precision: int = 6
    mmax: int = 4
    suite: str = "all"
    cache_dir: str | None = None
    no_cache: bool = False
    format: str = "json"
    timing: bool = False

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        names = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - names)
        if unknown:
            raise ConfigError(f"unknown configuration keys: {unknown}")
        cfg = cls(**d)
        cfg.validate()
        return cfg

    def validate(self):
        if self.command not in ("expand", "eisenstein", "padic", "verify"):
            raise ConfigError(f"unknown command {self.command!r}")
        if self.format not in ("json", "text", "csv"):
            raise ConfigError("format must be json, text or csv")
        if self.order < 2 or self.n < 0 or self.dps < 10 or self.precision < 1 or self.mmax < 0:
            raise ConfigError("orders and precisions must be positive")
        if (self.p is None) != (self.pi is None):
            raise ConfigError("--p and --pi go together")
        if self.numeric_only and self.exact_only:
            raise ConfigError("--numeric-only and --exact-only exclude each other")
        if self.suite not in ("exact", "padic", "analytic", "all"):
            raise ConfigError(f"unknown suite {self.suite!r}")

    def canonical(self) -> dict:
        """The parameters that affect this command's results."""
        keep = {"command", "curve", "presets"} | COMMAND_KEYS[self.command]
        return {k: v for k, v in sorted(asdict(self).items()) if k in keep}


def code_version() -> str:
    """Package version plus a digest of the package sources, so edited code never reuses old cache entries."""
    h = hashlib.sha256(__version__.encode())
    root = resources.files("ekpolylog")
    for name in sorted(p.name for p in root.iterdir() if p.name.endswith(".py")):
        h.update(name.encode())
        h.update(root.joinpath(name).read_bytes())
    return f"{__version__}+{h.hexdigest()[:12]}"


class Cache:
    def __init__(self, directory: str | None, enabled: bool = True):
        base = directory or os.environ.get(CACHE_ENV) or str(Path.home() / ".cache" / "ekpolylog")
        self.dir = Path(base)
        self.enabled = enabled
        self.version = code_version()

    def key(self, module: str, op: str, params: dict) -> str:
        blob = json.dumps({"module": module, "op": op, "params": params, "version": self.version},
                          sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()

    def get(self, module, op, params):
        if not self.enabled:
            return None
        path = self.dir / f"{self.key(module, op, params)}.json"
        if not path.exists():
            return None
        entry = json.loads(path.read_text())
        return entry["value"] if entry.get("version") == self.version else None

    def put(self, module, op, params, value):
        if not self.enabled:
            return
        self.dir.mkdir(parents=True, exist_ok=True)
        path = self.dir / f"{self.key(module, op, params)}.json"
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps({"version": self.version, "value": value}, sort_keys=True))
        tmp.replace(path)


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _curve(cfg: RunConfig):
    from .weierstrass import parse_presets, preset

    if cfg.presets:
        table = parse_presets(Path(cfg.presets).read_text())
        if cfg.curve not in table:
            raise ConfigError(f"curve {cfg.curve!r} not in {cfg.presets}")
        return table[cfg.curve]
    return preset(cfg.curve)


def _prime(cfg: RunConfig, c):
    from .weierstrass import parse_k_element

    if cfg.p is None:
        return c.prime_data()
    return c.prime_data(cfg.p, parse_k_element(cfg.pi, c.K))


def _kv(text: str, required: tuple) -> dict:
    out = {}
    for part in text.split(","):
        k, _, v = part.partition("=")
        if not v:
            raise ConfigError(f"expected key=value pairs, got {text!r}")
        out[k.strip()] = int(v)
    if set(out) != set(required):
        raise ConfigError(f"expected exactly the keys {required}, got {text!r}")
    return out


def _exact_str(x) -> str:
    from .exactnum import serialize_exact

    return serialize_exact(x)


def _padic_entry(x):
    from .exactnum import serialize_padic

    return {"value": serialize_padic(x), "provenance": f"p-adic absprec={x.absprec}"}


def _complex_entry(z, bound):
    return {"value": f"{complex(z).real:.15g}{complex(z).imag:+.15g}j", "provenance": f"complex bound={bound:.1e}"}


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_expand(cfg: RunConfig, cache: Cache) -> list:
    from .kronecker import connection_map, xi_expand
    from .weierstrass import division_polynomial, sigma_series, torsion_points, wp_family

    c = _curve(cfg)
    what = cfg.what
    field_name = f"Q(sqrt(-{c.d}))" if c.d else "Q"
    if what == "sigma":
        s = sigma_series(c, cfg.order)
        return [{"name": "sigma", "series": s.serialize(), "order": s.order, "field": field_name, "provenance": "exact"}]
    if what in ("wp", "dwp", "zeta", "F1"):
        s = getattr(wp_family(c, cfg.order), what)
        return [{"name": what, "series": s.serialize(), "order": s.order, "field": field_name, "provenance": "exact"}]
    if what == "Ln":
        h = connection_map(c, cfg.n)
        return [{"name": f"L{cfg.n}", "text": f"L{cfg.n} = {h.format()}", "field": field_name, "provenance": "exact"}]
    if what == "xi":
        mz, mw = (int(t) for t in cfg.orders.split(","))
        xi = xi_expand(c, mz, mw)
        rows = xi.theta_rows()
        return [{"name": f"w^{b - 1}", "series": r.serialize(), "order": r.order, "field": field_name,
                 "provenance": "exact"} for b, r in enumerate(rows)]
    if what == "division":
        u, v = division_polynomial(c, cfg.n)
        return [{"name": f"psi{cfg.n}", "u": [_exact_str(a) for a in u.c], "v": [_exact_str(a) for a in v.c],
                 "provenance": "exact"}]
    if what == "torsion":
        pts = torsion_points(c, cfg.n)
        return [{"name": P.label, "point": P.describe(), "annihilator": _exact_str(P.annihilator), "order": P.order}
                for P in pts[1:]]
    raise ConfigError(f"unknown expansion {what!r}")


def cmd_eisenstein(cfg: RunConfig, cache: Cache) -> list:
    from .exactnum import embed_complex
    from .weierstrass import select_point

    c = _curve(cfg)
    P = select_point(c, cfg.z0)
    a, b = cfg.a, cfg.b
    out = {"a": a, "b": b, "z0": cfg.z0}
    exact = None
    if not cfg.numeric_only:
        if a < 0 or b < 0:
            if cfg.exact_only:
                raise ConfigError("exact values need a, b >= 0")
        else:
            from .kronecker import ek_exact

            exact = ek_exact(c, P, a, b)
            out["exact"] = {"value": _exact_str(exact), "provenance": "exact e*_{a,b}/A^a"}
    if not cfg.exact_only:
        import mpmath as mp

        from .analytic import ek_numeric, lattice_of_curve, point_to_z

        L = lattice_of_curve(c, cfg.dps)
        z0 = mp.mpc(0) if P is None else point_to_z(L, P)
        with mp.workdps(L.dps):
            num = ek_numeric(L, a, b, z0) / L.A ** a
        bound = 10.0 ** (-(cfg.dps - 5))
        out["numeric"] = _complex_entry(num, bound)
        if exact is not None:
            diff = abs(num - embed_complex(exact, cfg.dps))
            out["difference"] = float(diff)
            out["match"] = bool(diff < 1e-8)
    return [out]


def _pipeline(cfg: RunConfig, c, sp, P, slack: int = 16):
    from .padicpolylog import DiscPipeline, choose_order

    mmax = max(cfg.mmax, cfg.table or 0)
    M = cfg.padic_order or choose_order(sp.norm, sp.p, cfg.precision, mmax, slack)
    return DiscPipeline(c, P, sp, M, cfg.precision, mmax)


def cmd_padic(cfg: RunConfig, cache: Cache) -> list:
    """Runs with slack 16; on PrecisionExhausted the slack doubles, at most twice."""
    from .errors import PrecisionExhausted

    for attempt, slack in enumerate(SLACK_SCHEDULE):
        try:
            return _padic_run(cfg, cache, slack)
        except PrecisionExhausted:
            if attempt == len(SLACK_SCHEDULE) - 1 or cfg.padic_order:
                raise


def _padic_run(cfg: RunConfig, cache: Cache, slack: int) -> list:
    from .exactnum import embed_padic, ledger_record, precision_ledger
    from .padicpolylog import interpolation_rhs
    from .weierstrass import select_point

    if cfg.smoke:
        return _padic_smoke(cfg)
    c = _curve(cfg)
    sp = _prime(cfg, c)
    z0 = cfg.z0 if cfg.z0 != "lattice" else "point:1,0"
    P = select_point(c, z0)
    if P is None:
        raise ConfigError("the p-adic pipeline needs a torsion point off the lattice")
    params = dict(cfg.canonical(), z0=z0, p=sp.p, pi=_exact_str(sp.pi), slack=slack)
    out = []
    if cfg.table is not None:
        hit = cache.get("padicpolylog", "specialization_table", params)
        if hit is None:
            with precision_ledger() as led:
                table = _pipeline(cfg, c, sp, P, slack).specialization_table(cfg.table)
            hit = {"degree": table.degree, "rows": table.serialize(), "min_precision": table.min_precision(),
                   "suppressed": [list(x) for x in table.suppressed], "normalization": table.normalization,
                   "ledger": led.as_dict()}
            cache.put("padicpolylog", "specialization_table", params, hit)
        for stage, rec in hit["ledger"].items():
            ledger_record(stage, rec["requested"], rec["achieved"])
        out.append({k: v for k, v in hit.items() if k != "ledger"} | {"name": "specialization_table"})
    pipe = None
    for item in cfg.moment:
        kv = _kv(item, ("a", "b"))
        pipe = pipe or _pipeline(cfg, c, sp, P, slack)
        val = pipe.moment(kv["a"], kv["b"])
        rhs = embed_padic(interpolation_rhs(c, P, kv["a"], kv["b"], sp), sp, val.absprec)
        out.append({"name": "moment", "a": kv["a"], "b": kv["b"], "value": _padic_entry(val),
                    "interpolation_match": (val - rhs).r == 0})
    for item in cfg.ehat:
        kv = _kv(item, ("m", "b"))
        pipe = pipe or _pipeline(cfg, c, sp, P, slack)
        e = pipe.ehat(kv["m"], kv["b"])
        out.append({"name": "ehat", "m": e.m, "b": e.b, "value": _padic_entry(e.value), "certified": e.certified})
    if not out:
        raise ConfigError("padic needs --table, --moment, --ehat or --smoke")
    return out


def _padic_smoke(cfg: RunConfig) -> list:
    """Supersingular run: inert prime, reduced order and precision; reports what could be certified."""
    from .exactnum import embed_padic
    from .padicpolylog import DiscPipeline, interpolation_rhs
    from .weierstrass import parse_k_element, select_point

    c = _curve(cfg)
    p, pi = (cfg.p, cfg.pi) if cfg.p is not None else (7, "-7")
    sp = c.prime_data(p, parse_k_element(pi, c.K))
    if sp.split:
        raise ConfigError("--smoke exercises an inert prime")
    z0 = cfg.z0 if cfg.z0 != "lattice" else "point:1,0"
    P = select_point(c, z0)
    pipe = DiscPipeline(c, P, sp, cfg.padic_order or 120, min(cfg.precision, 4), 1)
    out = []
    for b in (1, 2):
        for a in range(3):
            val = pipe.moment(a, b)
            rhs = embed_padic(interpolation_rhs(c, P, a, b, sp), sp, val.absprec)
            out.append({"name": "moment", "a": a, "b": b, "value": _padic_entry(val),
                        "interpolation_match": (val - rhs).r == 0})
        for m in (0, 1):
            e = pipe.ehat(m, b)
            out.append({"name": "ehat", "m": m, "b": b, "value": _padic_entry(e.value), "certified": e.certified})
    return out


def cmd_verify(cfg: RunConfig, cache: Cache) -> list:
    from .suites import run_suite

    return [r.as_dict() for r in run_suite(cfg.suite)]


COMMANDS = {"expand": cmd_expand, "eisenstein": cmd_eisenstein, "padic": cmd_padic, "verify": cmd_verify}


# ---------------------------------------------------------------------------
# Argument parsing and output
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--curve", default="gauss", help="curve preset name")
    common.add_argument("--presets", help="custom preset file (key=value lines)")
    common.add_argument("--cache-dir", help=f"cache directory (default ${CACHE_ENV} or ~/.cache/ekpolylog)")
    common.add_argument("--no-cache", action="store_true")
    common.add_argument("--format", default="json", choices=("json", "text", "csv"))
    common.add_argument("--timing", action="store_true", help="add a metadata block with wall time")
    common.add_argument("--config", help="JSON file with configuration keys (command-line flags win)")

    ap = argparse.ArgumentParser(prog="ekpolylog", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    e = sub.add_parser("expand", parents=[common], help="exact series and rational maps")
    e.add_argument("--what", default="sigma", choices=("sigma", "wp", "dwp", "zeta", "F1", "Ln", "xi", "division", "torsion"))
    e.add_argument("--n", type=int, default=2)
    e.add_argument("--order", type=int, default=12)
    e.add_argument("--orders", default="4,4")

    k = sub.add_parser("eisenstein", parents=[common], help="Eisenstein-Kronecker numbers, exact and numeric")
    k.add_argument("--a", type=int, default=0)
    k.add_argument("--b", type=int, default=0)
    k.add_argument("--z0", default="lattice")
    k.add_argument("--numeric-only", action="store_true")
    k.add_argument("--exact-only", action="store_true")
    k.add_argument("--dps", type=int, default=30)

    pa = sub.add_parser("padic", parents=[common], help="p-adic moments, E-hat values and the specialization table")
    pa.add_argument("--p", type=int)
    pa.add_argument("--pi")
    pa.add_argument("--z0", default="point:1,0")
    pa.add_argument("--table", type=int)
    pa.add_argument("--moment", action="append", default=[], help="a=..,b=..")
    pa.add_argument("--ehat", action="append", default=[], help="m=..,b=..")
    pa.add_argument("--smoke", action="store_true")
    pa.add_argument("--order", dest="padic_order", type=int)
    pa.add_argument("--precision", type=int, default=6)
    pa.add_argument("--mmax", type=int, default=4)

    v = sub.add_parser("verify", parents=[common], help="run acceptance suites")
    v.add_argument("--suite", default="all", choices=("exact", "padic", "analytic", "all"))
    return ap


def _config_from_args(ns: argparse.Namespace, argv) -> RunConfig:
    d = {k: v for k, v in vars(ns).items() if k != "config"}
    if ns.config:
        extra = json.loads(Path(ns.config).read_text())
        names = {f.name for f in fields(RunConfig)}
        unknown = sorted(set(extra) - names)
        if unknown:
            raise ConfigError(f"unknown configuration keys: {unknown}")
        given = {a.lstrip("-").split("=")[0].replace("-", "_") for a in argv if a.startswith("--")}
        for key, val in extra.items():
            if key not in given:
                d[key] = val
    return RunConfig.from_dict(d)


def _render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2, default=str)
    lines = []
    if fmt == "csv":
        keys = sorted({k for r in report["results"] for k in r})
        lines.append(",".join(keys))
        for r in report["results"]:
            lines.append(",".join(json.dumps(r.get(k, ""), sort_keys=True, default=str).replace(",", ";") for k in keys))
        return "\n".join(lines)
    for r in report["results"]:
        if "criterion" in r:
            lines.append(f"[{'PASS' if r['passed'] else 'FAIL'}] {r['criterion']:>2} {r['title']}: {r['detail']}")
        elif "text" in r:
            lines.append(r["text"])
        elif "rows" in r:
            lines.append(r["rows"].rstrip())
        else:
            lines.append(json.dumps(r, sort_keys=True, default=str))
    return "\n".join(lines)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    from .exactnum import precision_ledger

    t0 = time.perf_counter()
    try:
        cfg = _config_from_args(ns, argv)
        cache = Cache(cfg.cache_dir, not cfg.no_cache)
        with precision_ledger() as led:
            results = COMMANDS[cfg.command](cfg, cache)
    except (ConfigError, DomainError, PoleError, ValueError, FileNotFoundError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PrecisionError as exc:
        print(f"precision exhausted: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except EKError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    report = {"command": cfg.command, "params": cfg.canonical(), "results": results,
              "ledger": led.as_dict(), "version": __version__}
    if cfg.timing:
        report["metadata"] = {"seconds": round(time.perf_counter() - t0, 3), "code_version": cache.version}
    print(_render(report, cfg.format))
    if cfg.command == "verify" and not all(r["passed"] for r in results):
        return EXIT_FAIL
    if any(r.get("match") is False or r.get("interpolation_match") is False for r in results):
        return EXIT_FAIL
    if cfg.command == "padic" and not cfg.smoke:
        short = [r["name"] for r in results if _achieved(r) < cfg.precision]
        if short:
            print(f"precision exhausted: {short} below the requested {cfg.precision} digits", file=sys.stderr)
            return EXIT_PRECISION
    return EXIT_OK


def _achieved(r: dict) -> int:
    if "min_precision" in r:
        return r["min_precision"]
    if "certified" in r:
        return r["certified"]
    return int(r["value"]["provenance"].rsplit("=", 1)[1])


if __name__ == "__main__":
    sys.exit(main())
