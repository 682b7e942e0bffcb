"""Command-line front end: a JSON config in, a JSON record plus CSV tables out.

Subcommands ``verify``, ``spectrum``, ``roots``, ``thermo`` and ``scan`` each
take one config file with the sections ``model``, ``boundary``, ``solver``,
``scan`` and ``output``. Complex numbers are written as ``[re, im]`` pairs.
Exit codes: 0 success, 1 identity or assertion failure, 2 config error.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import logging
import math
import os
import sys
import tempfile
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import bethe as bt
from . import hamiltonians as hm
from . import scaling as sc
from . import spectra as spc
from . import thermo as th
from . import transfer as tr
from . import vertex as vx
from .transfer import ReducedXXX
from .vertex import D2Boundary, ModelKind, XXZBoundary

log = logging.getLogger(__name__)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
THREADS_ENV = "D2CHAIN_THREADS"
SECTIONS = ("model", "boundary", "solver", "scan", "output")
KINDS = {"xxz": ModelKind.XXZ_TRIG, "xxx": ModelKind.XXX_RATIONAL,
         "d2": ModelKind.D2_TRIG, "d2_rational": ModelKind.D2_RATIONAL}
BOUNDARY_MODES = ("raw", "hermitian", "fields", "pqxi")
DEFAULT_TOL = 1e-9
ROOT_ENERGY_TOL = 1e-8
SPECTRUM_CAPS = {"xxz": 14, "xxx": 14, "d2": 8, "d2_rational": 8}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------


def parse_complex(v, where: str = "value") -> complex:
    """A real number or an ``[re, im]`` pair."""
    if isinstance(v, bool):
        raise ConfigError(f"{where}: expected a number, got {v!r}")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
        return complex(v[0], v[1])
    raise ConfigError(f"{where}: expected a number or an [re, im] pair, got {v!r}")


def parse_real(v, where: str = "value") -> float:
    z = parse_complex(v, where)
    if z.imag != 0:
        raise ConfigError(f"{where}: expected a real number")
    return z.real


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [_jsonable(float(x.real)), _jsonable(float(x.imag))]
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


@dataclass
class RunConfig:
    """Validated run configuration; ``raw`` is the normalized config echo."""

    kind: str | None
    n: int | None
    eta: float | None
    thetas: tuple | None
    boundary_mode: str | None
    boundary: object
    solver: dict
    scan: dict
    output: dict
    seed: int
    tol: float
    raw: dict = field(default_factory=dict)

    @property
    def model_kind(self) -> ModelKind:
        return KINDS[self.kind]


def _sector_list(section, key, length, where):
    vals = section.get(key)
    if not isinstance(vals, (list, tuple)) or len(vals) != length:
        raise ConfigError(f"{where}.{key}: expected {length} entries")
    return vals


def _parse_sector(mode, spec, key, eta, where):
    if mode == "raw":
        vals = _sector_list(spec, key, 6, where)
        return XXZBoundary(*[parse_complex(v, f"{where}.{key}[{i}]") for i, v in enumerate(vals)])
    if mode == "hermitian":
        if eta is None:
            raise ConfigError("hermitian parametrization needs eta")
        s, s1, sp, sr, si = _sector_list(spec, key, 5, where)
        return hm.hermitian_xxz_params(parse_real(s, f"{where}.{key}[0]"), parse_complex(s1, f"{where}.{key}[1]"),
                                       parse_real(sp, f"{where}.{key}[2]"), parse_real(sr, f"{where}.{key}[3]"),
                                       parse_real(si, f"{where}.{key}[4]"), eta)
    if mode == "fields":
        if eta is None:
            raise ConfigError("field parametrization needs eta")
        f = spec.get(key)
        if not isinstance(f, dict):
            raise ConfigError(f"{where}.{key}: expected a field table")
        names = ("h1_plus", "h1_z", "hN_plus", "hN_z")
        missing = [k for k in names if k not in f]
        if missing:
            raise ConfigError(f"{where}.{key}: missing {missing}")
        kw = {k: parse_complex(f[k], f"{where}.{key}.{k}") for k in names}
        for k in ("h1_minus", "hN_minus"):
            if k in f:
                kw[k] = parse_complex(f[k], f"{where}.{key}.{k}")
        conv = f.get("convention", "pauli")
        if conv == "pauli":
            fields = hm.fields_from_pauli(**kw)
        elif conv == "direct":
            kw.setdefault("h1_minus", np.conj(kw["h1_plus"]))
            kw.setdefault("hN_minus", np.conj(kw["hN_plus"]))
            fields = hm.BoundaryFields(**kw)
        else:
            raise ConfigError(f"{where}.{key}.convention must be 'pauli' or 'direct'")
        try:
            return hm.params_from_fields(fields, eta)
        except ValueError as exc:
            raise ConfigError(f"{where}.{key}: {exc}") from exc
    vals = _sector_list(spec, key, 3, where)
    p, q, xi = (parse_real(v, f"{where}.{key}[{i}]") for i, v in enumerate(vals))
    return ReducedXXX(p, q, xi)


def _parse_boundary(section, kind, eta):
    if not isinstance(section, dict):
        raise ConfigError("boundary: expected a table")
    modes = [m for m in BOUNDARY_MODES if m in section]
    extra = set(section) - set(BOUNDARY_MODES)
    if extra:
        raise ConfigError(f"boundary: unknown keys {sorted(extra)}")
    if len(modes) != 1:
        raise ConfigError(f"boundary: exactly one of {BOUNDARY_MODES} is required, got {modes or 'none'}")
    mode = modes[0]
    spec = section[mode]
    mk = KINDS[kind]
    if mode in ("hermitian", "fields") and not mk.trig:
        raise ConfigError(f"boundary.{mode} applies to trigonometric kinds")
    if mode == "pqxi" and mk.trig:
        raise ConfigError("boundary.pqxi applies to the isotropic kinds")
    if mode == "pqxi" and kind == "xxx" and isinstance(spec, list):
        spec = {"s": spec}
    if not isinstance(spec, dict):
        raise ConfigError(f"boundary.{mode}: expected a table with sector keys")
    keys = ("s", "t") if mk.d2 else ("s",)
    extra = set(spec) - set(keys)
    if extra:
        raise ConfigError(f"boundary.{mode}: unknown sector keys {sorted(extra)}")
    sectors = [_parse_sector(mode, spec, k, eta, f"boundary.{mode}") for k in keys]
    if not mk.d2:
        return mode, sectors[0]
    if mode == "pqxi":
        return mode, tuple(sectors)
    return mode, D2Boundary(*sectors)


def _int_list(v, where):
    if not isinstance(v, list) or not v or not all(isinstance(x, int) and not isinstance(x, bool) for x in v):
        raise ConfigError(f"{where}: expected a non-empty list of integers")
    return v


def build_config(data: dict, seed: int | None = None, tol: float | None = None,
                 need_boundary: bool = True) -> RunConfig:
    """Validate a config tree (``--seed`` / ``--tol`` overrides applied)."""
    if not isinstance(data, dict):
        raise ConfigError("config root must be a table")
    unknown = set(data) - set(SECTIONS)
    if unknown:
        raise ConfigError(f"unknown sections {sorted(unknown)}")
    raw = copy.deepcopy(data)
    model = raw.setdefault("model", {})
    solver = raw.setdefault("solver", {})
    output = raw.setdefault("output", {})
    scan = raw.get("scan", {})
    for name, sec in (("model", model), ("solver", solver), ("output", output), ("scan", scan)):
        if not isinstance(sec, dict):
            raise ConfigError(f"{name}: expected a table")
    if seed is not None:
        solver["seed"] = int(seed)
    if tol is not None:
        solver["tol"] = float(tol)
    solver.setdefault("seed", 0)
    solver.setdefault("tol", DEFAULT_TOL)
    if not isinstance(solver["seed"], int) or isinstance(solver["seed"], bool):
        raise ConfigError("solver.seed: expected an integer")
    tol_val = parse_real(solver["tol"], "solver.tol")
    if not tol_val > 0:
        raise ConfigError("solver.tol must be positive")

    kind = model.get("kind")
    if kind is not None and kind not in KINDS:
        raise ConfigError(f"model.kind must be one of {sorted(KINDS)}")
    n = model.get("n")
    if n is not None and (not isinstance(n, int) or isinstance(n, bool) or n < 1):
        raise ConfigError("model.n: expected a positive integer")
    eta = model.get("eta")
    if eta is not None:
        eta = parse_real(eta, "model.eta")
        if not eta > 0:
            raise ConfigError("model.eta must be positive")
    if kind is not None and KINDS[kind].trig and eta is None:
        raise ConfigError(f"model.kind {kind!r} needs model.eta")
    if kind is not None and not KINDS[kind].trig and eta is not None:
        raise ConfigError(f"model.kind {kind!r} takes no eta")
    thetas = model.get("thetas")
    if thetas is not None:
        if not isinstance(thetas, list) or n is None or len(thetas) != n:
            raise ConfigError("model.thetas: expected one entry per site")
        thetas = tuple(parse_complex(t, f"model.thetas[{i}]") for i, t in enumerate(thetas))

    mode, boundary = None, None
    if "boundary" in raw:
        if kind is None:
            raise ConfigError("boundary given without model.kind")
        mode, boundary = _parse_boundary(raw["boundary"], kind, eta)
    elif need_boundary:
        raise ConfigError("boundary section is required")
    return RunConfig(kind, n, eta, thetas, mode, boundary, solver, scan, output,
                     solver["seed"], tol_val, raw)


def load_config(path: str, seed: int | None = None, tol: float | None = None,
                need_boundary: bool = True) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return build_config(data, seed, tol, need_boundary)


# ---------------------------------------------------------------------------
# records and files
# ---------------------------------------------------------------------------


@dataclass
class ResultRecord:
    command: str
    config: dict
    outputs: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    version: str = __version__
    files: list = field(default_factory=list)
    status: str = "ok"
    messages: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return _jsonable({
            "command": self.command, "version": self.version, "status": self.status,
            "config": self.config, "outputs": self.outputs, "residuals": self.residuals,
            "timings": self.timings, "files": self.files, "messages": self.messages,
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"


def atomic_write(path: str, text: str):
    """Write-temp-then-rename so readers never see a partial file."""
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def csv_text(header, rows) -> str:
    import io
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


class _Outputs:
    def __init__(self, cfg: RunConfig, command: str):
        self.dir = cfg.output.get("dir", ".")
        self.prefix = cfg.output.get("prefix", command)
        self.files = []

    def path(self, suffix: str) -> str:
        return os.path.join(self.dir, f"{self.prefix}_{suffix}")

    def table(self, suffix, header, rows) -> str:
        p = self.path(suffix + ".csv")
        atomic_write(p, csv_text(header, rows))
        self.files.append(os.path.basename(p))
        return p


class _Timer:
    def __init__(self, enabled: bool):
        self.enabled = enabled
        self.timings = {}

    def __call__(self, name):
        timer = self

        class _Ctx:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                if timer.enabled:
                    timer.timings[name] = time.perf_counter() - self.t0
                return False
        return _Ctx()


def _threads() -> int:
    v = os.environ.get(THREADS_ENV)
    if not v:
        return 1
    try:
        return max(1, int(v))
    except ValueError as exc:
        raise ConfigError(f"{THREADS_ENV} must be an integer") from exc


# ---------------------------------------------------------------------------
# model helpers
# ---------------------------------------------------------------------------


def _require(cfg: RunConfig, *what):
    for w in what:
        if w == "kind" and cfg.kind is None:
            raise ConfigError("model.kind is required")
        if w == "n" and cfg.n is None:
            raise ConfigError("model.n is required")
        if w == "boundary" and cfg.boundary is None:
            raise ConfigError("boundary section is required")


def _hermitian_model(cfg: RunConfig, tol: float = 1e-10) -> bool:
    """Whether the two-site Hamiltonian of this boundary is hermitian."""
    small = copy.copy(cfg)
    small.n = 2
    m = build_hamiltonian(small).dense()
    return float(np.max(np.abs(m - m.conj().T))) <= tol * max(1.0, float(np.max(np.abs(m))))


def _is_reduced_pair(b) -> bool:
    return isinstance(b, tuple)


def _spin_sectors(cfg: RunConfig) -> list:
    """``(label, boundary)`` of the spin-1/2 chains the model splits into."""
    b = cfg.boundary
    if cfg.model_kind.d2:
        if _is_reduced_pair(b):
            return [("s+", b[0]), ("s-", b[1])]
        return [("s+", b.splus), ("s-", b.sminus)]
    return [("s", b)]


def _vertex_params(b):
    """Boundary usable by the vertex-level K-matrices."""
    return bt.raw_from_reduced(b) if isinstance(b, ReducedXXX) else b


def build_hamiltonian(cfg: RunConfig, sparse: bool | None = None):
    _require(cfg, "kind", "n", "boundary")
    n, eta, b = cfg.n, cfg.eta, cfg.boundary
    if n > SPECTRUM_CAPS[cfg.kind]:
        raise ConfigError(f"N={n} exceeds the cap {SPECTRUM_CAPS[cfg.kind]} for {cfg.kind}")
    if cfg.kind == "xxz":
        return hm.h_xxz_open(n, eta, b, sparse=sparse)
    if cfg.kind == "d2":
        return hm.h_d2_open(n, eta, b.splus, b.sminus, sparse=sparse)
    if cfg.kind == "xxx":
        if isinstance(b, ReducedXXX):
            return hm.h_xxx_family("xxx_reduced", n, (b.p, b.q, b.xi), sparse=sparse)
        return hm.h_xxx_family("xxx_raw", n, b, sparse=sparse)
    if _is_reduced_pair(b):
        raise ConfigError("the isotropic D2 Hamiltonian needs a raw boundary")
    return hm.h_xxx_family("iso_d2", n, b, sparse=sparse)


def _sector_family(cfg: RunConfig, b, thetas=None) -> tr.TransferFamily:
    kind = ModelKind.XXZ_TRIG if cfg.model_kind.trig else ModelKind.XXX_RATIONAL
    th = thetas if thetas is not None else (cfg.thetas or ())
    return tr.TransferFamily(kind, cfg.n, b, cfg.eta, th)


def _reduced_of(b) -> ReducedXXX | None:
    """Three-parameter form of an isotropic sector, None if it has none."""
    if isinstance(b, ReducedXXX):
        return b
    tol = 1e-12
    if (abs(b.s.imag) > tol or abs(b.sp.imag) > tol or abs(b.s2 - np.conj(b.s1)) > tol
            or abs(b.s2p - np.conj(b.s1p)) > tol):
        return None
    try:
        return hm.reduce_boundary_xxx(b).reduced
    except (ValueError, ZeroDivisionError):
        return None


def _sector_h(cfg: RunConfig, b, sparse=None):
    if cfg.model_kind.trig:
        return hm.h_xxz_open(cfg.n, cfg.eta, b, sparse=sparse)
    if isinstance(b, ReducedXXX):
        return hm.h_xxx_family("xxx_reduced", cfg.n, (b.p, b.q, b.xi), sparse=sparse)
    return hm.h_xxx_family("xxx_raw", cfg.n, b, sparse=sparse)


def _classify(zs, cfg, b):
    derived = vx.derived_boundary(b, mode="hermitian") if cfg.model_kind.trig else None
    spc.classify_roots(zs, eta=cfg.eta, derived=derived)
    return zs


def _root_energy(zs, b) -> float:
    sp = b.sp if isinstance(b, XXZBoundary) and zs.kind == "trig" else None
    return float(np.real(spc.energy_from_roots(zs, sp=sp)))


def _sector_roots(cfg: RunConfig, b, backend: str):
    """Ground-state zero roots of one spin-1/2 sector and its ED energy."""
    rb = b
    if not cfg.model_kind.trig:
        rb = _reduced_of(b)
        if rb is None:
            raise ConfigError("zero roots of the isotropic chain need a reducible (hermitian) boundary")
    e_ed, psi = spc.ground_state(_sector_h(cfg, rb if not cfg.model_kind.trig else b))
    if backend == "ed":
        fam = _sector_family(cfg, rb, thetas=())
        zs = spc.extract_zero_roots(spc.eigenvalue_sampler(fam, psi))
    elif backend == "zero_root_solver":
        if not cfg.model_kind.trig:
            raise ConfigError("the zero-root solver needs a trigonometric sector")
        derived = vx.derived_boundary(b, mode="hermitian")
        zs = bt.solve_zero_roots(bt.ZeroRootSystem("trig", cfg.n, b, cfg.eta), derived=derived)
    else:
        raise ConfigError(f"unknown root backend {backend!r}")
    _classify(zs, cfg, rb)
    return zs, float(e_ed), _root_energy(zs, rb)


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def _draw_point(rng, scale=0.6):
    return complex(rng.uniform(-scale, scale), rng.uniform(-scale, scale))


def cmd_verify(cfg: RunConfig) -> tuple[ResultRecord, int]:
    """Identity suite at seeded random points; exit 1 naming every failed identity."""
    _require(cfg, "kind", "boundary")
    rng = np.random.default_rng(cfg.seed)
    timer = _Timer(cfg.output.get("timings", True))
    kind, eta, tol = cfg.model_kind, cfg.eta, cfg.tol
    draws = int(cfg.solver.get("draws", 2))
    corrupt = float(cfg.solver.get("corrupt_eta", 0.0))
    n = cfg.n or 2
    if n > (3 if kind.d2 else 4):
        raise ConfigError("verify builds dense transfer matrices: N <= 3 (D2) or 4 (spin-1/2)")
    checks = []

    def add(name, point, res, counted=True):
        checks.append({"identity": name, "point": point, "residual": float(res),
                       "pass": bool(res <= tol), "counted": counted})

    b = cfg.boundary
    vparams = b if kind.d2 and not _is_reduced_pair(b) else None
    if kind.d2 and vparams is None:
        raise ConfigError("verify on a D2 kind needs a raw or hermitian boundary")
    if not kind.d2:
        vparams = _vertex_params(b)
    with timer("vertex"):
        for _ in range(draws):
            u, v = _draw_point(rng), _draw_point(rng)
            kinds = [kind, kind.factor] if kind.d2 else [kind]
            for k in kinds:
                add(f"ybe[{k.value}]", [u, v], vx.verify_ybe(k, u, v, eta))
                for key, res in vx.verify_r_properties(k, u, eta).items():
                    add(f"r_{key}[{k.value}]", [u], res)
            add("reflection", [u, v], vx.verify_reflection(kind, "right", u, v, vparams, eta))
            add("dual_reflection", [u, v], vx.verify_reflection(kind, "left", u, v, vparams, eta))
            if kind is ModelKind.D2_RATIONAL:
                # the alternative k42 sign is recorded without counting
                for side, name in (("right", "reflection"), ("left", "dual_reflection")):
                    add(f"{name}[k42 printed]", [u, v],
                        vx.verify_reflection(kind, side, u, v, vparams, eta, k42_variant="printed"),
                        counted=False)
            if kind.d2:
                fe = eta + corrupt if (kind.trig and corrupt) else None
                add("factorization_r", [u], vx.verify_factorization_r(kind, u, eta, factor_eta=fe))
                for side in ("right", "left"):
                    add(f"factorization_k[{side}]", [u], vx.verify_factorization_k(kind, side, u, vparams, eta))

    thetas = cfg.thetas or tuple(1j * rng.uniform(0.1, 0.5, n))
    herm = _hermitian_model(cfg)
    with timer("transfer"):
        if kind.d2:
            fam = tr.TransferFamily(kind, n, vparams, eta, thetas)
        else:
            fam = tr.TransferFamily(kind, n, b, eta, thetas)
        for _ in range(draws):
            u, v = _draw_point(rng), _draw_point(rng)
            add("commutativity", [u, v], tr.commutator_residual(fam, u, v))
            for key, res in tr.check_crossing_and_hermiticity(fam, u).items():
                # t(u)^dagger = t(u*) needs a hermitian Hamiltonian
                add(key, [u], res, counted=key != "hermiticity" or herm)
            if kind.d2:
                add("transfer_factorization", [u], tr.check_transfer_factorization(fam, u))
        for label, sb in _spin_sectors(cfg):
            if kind.trig:
                sfam = _sector_family(cfg, sb, thetas=thetas)
                for j in range(1, n + 1):
                    for sign in (1, -1):
                        add(f"fusion[{label}] j={j} {'+' if sign > 0 else '-'}", [sign * thetas[j - 1]],
                            tr.check_fusion_identity(sfam, j, sign))
                for key, res in tr.check_special_values_and_asymptotics(sfam).items():
                    # the as-written i*pi value is a recorded alternative, not a requirement
                    add(f"{key}[{label}]", [], res, counted=not key.endswith("_as_written"))
            else:
                red = _reduced_of(sb)
                if red is None:
                    checks.append({"identity": f"fusion[{label}]", "point": [], "residual": None,
                                   "pass": None, "counted": False,
                                   "note": "boundary has no three-parameter form"})
                    continue
                sfam = tr.TransferFamily(ModelKind.XXX_RATIONAL, n, red, None, thetas)
                for key, res in tr.xxx_functional_relations(sfam).items():
                    add(f"{key}[{label}]", [], res)

    failed = sorted({c["identity"] for c in checks if c["counted"] and not c["pass"]})
    recorded = {c["identity"]: c["pass"] for c in checks if not c["counted"] and c["pass"] is not None}
    out = _Outputs(cfg, "verify")
    out.table("checks", ["identity", "point", "residual", "pass", "counted"],
              [[c["identity"], json.dumps(_jsonable(c["point"])),
                c["residual"] if c["residual"] is not None else float("nan"),
                c["pass"] if c["pass"] is not None else "", c["counted"]] for c in checks])
    counted = [c["residual"] for c in checks if c["counted"]]
    rec = ResultRecord("verify", cfg.raw,
                       outputs={"checks": len(checks), "failed": failed, "recorded_only": recorded},
                       residuals={"max_counted": max(counted) if counted else 0.0, "tol": tol},
                       timings=timer.timings, files=out.files)
    if failed:
        rec.status = "fail"
        rec.messages = [f"identity failed: {name}" for name in failed]
    return rec, EXIT_FAIL if failed else EXIT_OK


# ---------------------------------------------------------------------------
# spectrum and roots
# ---------------------------------------------------------------------------


def _root_rows(label, zs):
    return [[label, float(np.real(z)), float(np.imag(z)), ":".join(str(x) for x in c)]
            for z, c in zip(zs.roots, zs.classes)]


def _roots_block(cfg: RunConfig, backend: str, out: _Outputs, timer: _Timer):
    rows, per, e_ed, e_roots = [], {}, 0.0, 0.0
    with timer("roots"):
        for label, sb in _spin_sectors(cfg):
            zs, ed, er = _sector_roots(cfg, sb, backend)
            rows += _root_rows(label, zs)
            per[label] = {"ed_energy": ed, "root_energy": er, "inventory": spc.inventory(zs),
                          "fit_residual": zs.fit_residual, "notes": list(zs.notes)}
            e_ed += ed
            e_roots += er
    out.table("roots", ["sector", "re_z", "im_z", "class"], rows)
    return per, e_ed, e_roots


def cmd_spectrum(cfg: RunConfig) -> tuple[ResultRecord, int]:
    """Eigenvalues to CSV; with ``solver.roots`` also the ground-state zero roots."""
    _require(cfg, "kind", "n", "boundary")
    timer = _Timer(cfg.output.get("timings", True))
    mode = cfg.solver.get("mode", "full")
    k = int(cfg.solver.get("k", 1))
    if mode not in ("full", "extremal"):
        raise ConfigError("solver.mode must be 'full' or 'extremal'")
    dim = KINDS[cfg.kind].local_dim ** cfg.n
    if mode == "full" and dim > spc.FULL_CAP:
        raise ConfigError(f"dimension {dim} exceeds the dense cap {spc.FULL_CAP}; use mode 'extremal'")
    with timer("build"):
        h = build_hamiltonian(cfg, sparse=mode == "extremal" and dim > 1024)
    with timer("diagonalize"):
        spec = spc.diagonalize(h, mode, k=k)
    w = np.asarray(spec.eigenvalues)
    out = _Outputs(cfg, "spectrum")
    if np.all(np.abs(np.imag(w)) <= 1e-12 * max(1.0, float(np.max(np.abs(w))))):
        out.table("spectrum", ["index", "value"], [[i, float(np.real(x))] for i, x in enumerate(w)])
    else:
        out.table("spectrum", ["index", "value_re", "value_im"],
                  [[i, float(np.real(x)), float(np.imag(x))] for i, x in enumerate(w)])
    outputs = {"dimension": dim, "count": len(w), "ground_energy": float(np.min(np.real(w)))}
    residuals = {"eigen": spec.residual}
    code = EXIT_OK
    rec = ResultRecord("spectrum", cfg.raw, outputs, residuals)
    if cfg.solver.get("roots", False):
        per, e_ed, e_roots = _roots_block(cfg, cfg.solver.get("backend", "ed"), out, timer)
        dev = abs(outputs["ground_energy"] - e_roots)
        outputs.update({"sectors": per, "root_energy": e_roots, "sector_ed_energy": e_ed})
        residuals["ground_vs_roots"] = dev
        if dev > ROOT_ENERGY_TOL:
            rec.status = "fail"
            rec.messages.append(f"ground energy differs from the zero-root energy by {dev:.3g}")
            code = EXIT_FAIL
    rec.timings, rec.files = timer.timings, out.files
    return rec, code


def cmd_roots(cfg: RunConfig) -> tuple[ResultRecord, int]:
    """Ground-state zero roots (``ed`` / ``zero_root_solver``) or all Bethe-root sets (``bae``)."""
    _require(cfg, "kind", "n", "boundary")
    timer = _Timer(cfg.output.get("timings", True))
    backend = cfg.solver.get("backend", "ed")
    out = _Outputs(cfg, "roots")
    rec = ResultRecord("roots", cfg.raw)
    code = EXIT_OK
    if backend in ("ed", "zero_root_solver"):
        per, e_ed, e_roots = _roots_block(cfg, backend, out, timer)
        dev = abs(e_ed - e_roots)
        rec.outputs = {"sectors": per, "ed_energy": e_ed, "root_energy": e_roots}
        rec.residuals = {"ed_vs_roots": dev}
        if dev > ROOT_ENERGY_TOL:
            rec.status, code = "fail", EXIT_FAIL
            rec.messages.append(f"ED energy differs from the zero-root energy by {dev:.3g}")
    elif backend == "bae":
        if cfg.n > 4:
            raise ConfigError("the Bethe-root backend enumerates dense eigenstates: N <= 4")
        kind = "trig" if cfg.model_kind.trig else "rational"
        rows, per = [], {}
        with timer("bae"):
            for label, sb in _spin_sectors(cfg):
                sols = bt.solve_bae(kind, sb, cfg.n, seeds=cfg.solver.get("seeds", "ed"), eta=cfg.eta,
                                    thetas=cfg.thetas, rng=cfg.seed, tol=float(cfg.solver.get("bae_tol", 1e-10)))
                for i, s in enumerate(sols):
                    rows += [[label, i, float(m.real), float(m.imag)] for m in s.bethe_roots]
                res = [float(s.residual) for s in sols]
                per[label] = {"solutions": len(sols), "expected": 2**cfg.n,
                              "max_residual": max(res) if res else None}
        out.table("bethe_roots", ["sector", "solution", "re_mu", "im_mu"], rows)
        rec.outputs = {"sectors": per}
    else:
        raise ConfigError("solver.backend must be 'ed', 'zero_root_solver' or 'bae'")
    rec.timings, rec.files = timer.timings, out.files
    return rec, code


# ---------------------------------------------------------------------------
# thermo
# ---------------------------------------------------------------------------


def _thermo_result(cfg: RunConfig):
    b = cfg.boundary
    if cfg.kind == "xxz":
        return th.surface_energy_xxz(cfg.eta, b), lambda n: th.ground_energy_trig(
            n, cfg.eta, vx.derived_boundary(b, mode="hermitian"), b.sp)
    if cfg.kind == "d2":
        return th.surface_energy_d2_trig(cfg.eta, b.splus, b.sminus), None
    if cfg.kind == "xxx":
        red = _reduced_of(b)
        if red is None:
            raise ConfigError("thermo on the isotropic chain needs a hermitian boundary")
        return th.surface_energy_xxx(red.p, red.q, red.xi), lambda n: th.ground_energy_xxx(
            n, red.p, red.q, red.xi)
    pair = b if _is_reduced_pair(b) else (_reduced_of(b.splus), _reduced_of(b.sminus))
    if any(r is None for r in pair):
        raise ConfigError("thermo on the isotropic D2 chain needs hermitian sectors")
    return th.surface_energy_d2_rational(*pair), None


def cmd_thermo(cfg: RunConfig) -> tuple[ResultRecord, int]:
    """Closed-form surface energy with its per-term breakdown (hermitian parameters)."""
    _require(cfg, "kind", "boundary")
    timer = _Timer(cfg.output.get("timings", True))
    with timer("thermo"), warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", th.RegimeWarning)
        res, ground = _thermo_result(cfg)
        outputs = {"surface_energy": res.value, "breakdown": res.breakdown, "notes": list(res.notes)}
        if cfg.n is not None:
            family_bulk = sc.bulk_energy_per_site(cfg.kind if cfg.kind != "d2_rational" else "xxx", cfg.eta)
            if cfg.kind == "d2_rational":
                family_bulk *= 2
            outputs["bulk_energy_per_site"] = family_bulk
            outputs["ground_energy"] = ground(cfg.n) if ground else cfg.n * family_bulk + res.value
    regime = [str(w.message) for w in caught if issubclass(w.category, th.RegimeWarning)]
    for msg in regime:
        print(f"warning: {msg}", file=sys.stderr)
    rec = ResultRecord("thermo", cfg.raw, outputs, {"breakdown_sum": res.check()}, timer.timings)
    rec.messages = [f"regime warning: {m}" for m in regime]
    out = _Outputs(cfg, "thermo")
    out.table("breakdown", ["term", "value"], list(res.breakdown.items()) + [("total", res.value)])
    rec.files = out.files
    return rec, EXIT_OK


# ---------------------------------------------------------------------------
# scan
# ---------------------------------------------------------------------------


def _fit_summary(fit: sc.FitResult) -> dict:
    out = {"model": fit.model, "coefficients": dict(fit.coefficients), "residual": fit.residual}
    try:
        out["limit"] = fit.limit
    except KeyError:
        pass
    return out


def _fit(table, name):
    if name in (None, "none"):
        return None
    if name == "linear":
        return sc.fit_linear(table)
    if name == "exponential":
        return sc.fit_exponential(table)
    if name.startswith("inverse_power"):
        return sc.fit_inverse_power(table)
    raise ConfigError("scan.fit must be none, linear, exponential or inverse_power")


def _za_fields(cfg: RunConfig):
    if cfg.boundary_mode != "fields":
        return None
    f = cfg.raw["boundary"]["fields"]["s"]
    if f.get("convention", "pauli") != "pauli":
        raise ConfigError("the z_a protocol takes fields in the pauli convention")
    return {k: parse_complex(v) for k, v in f.items() if k != "convention"}


def cmd_scan(cfg: RunConfig) -> tuple[ResultRecord, int]:
    """Finite-size scan to CSV plus a fit summary (fits also go to ``*_fit.csv``)."""
    s = cfg.scan
    timer = _Timer(cfg.output.get("timings", True))
    protocol = s.get("protocol", "series")
    ns = _int_list(s.get("ns", list(range(4, 10))), "scan.ns")
    out = _Outputs(cfg, "scan")
    rec = ResultRecord("scan", cfg.raw)
    flags, fits = [], {}
    try:
        with timer("scan"):
            if protocol == "za":
                etas = [parse_real(e, "scan.etas") for e in s.get("etas", [0.5, 0.75, 1.0])]
                backend = s.get("backend", "ed")
                res = sc.za_protocol(etas, ns, backend, _za_fields(cfg))
                rows = []
                for eta, (table, fit) in res.items():
                    rows += [[eta, n, v] for n, v in table.rows()]
                    flags += table.flags
                    fits[f"eta={eta:g}"] = _fit_summary(fit)
                    fits[f"eta={eta:g}"]["slope_over_2eta"] = fit.coefficients["a"] / (2 * eta)
                out.table("data", ["eta", "N", "z_a"], rows)
            elif protocol == "surface":
                _require(cfg, "boundary")
                if cfg.kind != "d2" or _is_reduced_pair(cfg.boundary):
                    raise ConfigError("the surface protocol needs a trigonometric D2 boundary")
                res = sc.surface_energy_protocol(cfg.eta, cfg.boundary, ns)
                out.table("data", ["N", "surface_energy"], res["table"].rows())
                flags += res["table"].flags
                fits["exponential"] = _fit_summary(res["fit"])
                rec.outputs.update({"formula": res["formula"].value, "deviation": res["deviation"]})
            elif protocol == "sweep":
                _require(cfg, "boundary")
                if cfg.kind != "d2" or _is_reduced_pair(cfg.boundary):
                    raise ConfigError("the sweep protocol needs a trigonometric D2 boundary")
                xs = [parse_real(x, "scan.xs") for x in s.get("xs", [])]
                if not xs:
                    raise ConfigError("scan.xs is required for the sweep protocol")
                rows = sc.surface_energy_sweep(cfg.eta, cfg.boundary, xs, ns)
                out.table("data", ["re_s1", "analytic", "ed"], rows)
                dev = [abs(a - e) for _, a, e in rows]
                rec.outputs["max_deviation"] = max(dev)
            elif protocol == "xxx_surface":
                _require(cfg, "boundary")
                red = _reduced_of(cfg.boundary) if cfg.kind == "xxx" else None
                if red is None:
                    raise ConfigError("the xxx_surface protocol needs an isotropic spin-1/2 boundary")
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", th.RegimeWarning)
                    res = sc.xxx_surface_protocol(red.p, red.q, red.xi, ns, int(s.get("order", 3)))
                out.table("data", ["N", "surface_energy"], res["table"].rows())
                flags += res["table"].flags
                fits["inverse_power"] = _fit_summary(res["fit"])
                rec.outputs.update({"formula": res["formula"].value, "deviation": res["deviation"]})
            elif protocol == "series":
                family = s.get("family", cfg.kind)
                params = None
                if family in ("xxz", "d2"):
                    _require(cfg, "boundary")
                    params = cfg.boundary
                elif family == "xxx":
                    _require(cfg, "boundary")
                    red = _reduced_of(cfg.boundary)
                    params = None if red is None else (red.p, red.q, red.xi)
                eta = cfg.eta if family is not None and not str(family).startswith("xxx") else None
                try:
                    spec = sc.ScanSpec(family, tuple(ns), s.get("quantity", "ground_energy"),
                                       s.get("backend", "ed"), eta, params, _threads())
                except ValueError as exc:
                    raise ConfigError(f"scan: {exc}") from exc
                table = sc.run_scan(spec)
                flags += table.flags
                out.table("data", ["N", spec.quantity], table.rows())
                fit = _fit(table.valid(), s.get("fit"))
                if fit is not None:
                    fits[fit.model] = _fit_summary(fit)
            else:
                raise ConfigError("scan.protocol must be series, za, surface, sweep or xxx_surface")
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"scan: {exc}") from exc
    if fits:
        rows = []
        for name, f in fits.items():
            rows += [[name, f["model"], c, v] for c, v in f["coefficients"].items()]
            rows.append([name, f["model"], "residual", f["residual"]])
        out.table("fit", ["series", "model", "coefficient", "value"], rows)
    rec.outputs["fits"] = fits
    rec.outputs["flags"] = flags
    rec.timings, rec.files = timer.timings, out.files
    if flags:
        rec.status = "partial"
        rec.messages = [f"scan point failed: {f}" for f in flags]
        return rec, EXIT_FAIL
    return rec, EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


COMMANDS = {"verify": cmd_verify, "spectrum": cmd_spectrum, "roots": cmd_roots,
            "thermo": cmd_thermo, "scan": cmd_scan}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="d2chain", description="Open D2 spin chain toolkit.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sp = sub.add_parser(name, help=(fn.__doc__ or "").splitlines()[0])
        sp.add_argument("config", help="JSON config file")
        sp.add_argument("--seed", type=int, default=None, help="override solver.seed")
        sp.add_argument("--tol", type=float, default=None, help="override solver.tol")
    return p


def run(command: str, cfg: RunConfig) -> tuple[ResultRecord, int]:
    """Dispatch and write ``<prefix>_record.json``."""
    rec, code = COMMANDS[command](cfg)
    out = _Outputs(cfg, command)
    atomic_write(out.path("record.json"), rec.to_json())
    return rec, code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, args.seed, args.tol,
                          need_boundary=args.command not in ("scan",))
        rec, code = run(args.command, cfg)
    except ValueError as exc:
        # ConfigError and library precondition failures
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (bt.ConvergenceError, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    for msg in rec.messages:
        print(msg, file=sys.stderr)
    print(f"{args.command}: {rec.status}")
    return code


if __name__ == "__main__":
    sys.exit(main())
