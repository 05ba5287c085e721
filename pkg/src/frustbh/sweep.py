"""Grid execution, result records and their serialization.

Output files are rewritten atomically, in grid order, after every finished
point. An interrupted sweep therefore leaves a valid file behind, and a
restart with the same output path skips the points already present and
ends with the same bytes a single uninterrupted run would produce.

Per-point problems that do not fit the fixed column set (solver failures,
skipped observables) go to a sidecar file next to the output, named
``<stem>.notes.csv``. Failed points are absent from the main file so that a
rerun retries them.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Iterable, Sequence

from .config import ModelConfig, ObservableConfig, SolverConfig, SweepConfig
from .correlators import chiral_average, dimer_average
from .eigensolver import ground_state, resolve_momentum_sector
from .entanglement import ggm, half_chain_entropy
from .fock import FockBasis
from .hamiltonian import CouplingParams, build_hamiltonian
from .momentum import classify_commensurate, momentum_profile

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
WORKERS_ENV = "FRUSTBH_WORKERS"

COLUMNS = (
    "schema_version", "M", "N", "n_max", "boundary", "hardcore", "t1", "t2", "U", "Uprime",
    "E0", "gap", "degenerate", "eta", "q_max", "commensurate", "Sq_norm", "kappa_bar",
    "Dxy_bar_kinetic", "Dxy_bar_current", "Dzz_bar", "E_half", "ggm", "ggm_argmax_bitmask",
    "solver_iters", "residual",
)
KEY_COLUMNS = ("M", "N", "n_max", "boundary", "hardcore", "t1", "t2", "U")
NOTE_COLUMNS = ("t1", "Uprime", "kind", "field", "message")
_INT_COLUMNS = {"schema_version", "M", "N", "n_max", "ggm_argmax_bitmask", "solver_iters"}
_BOOL_COLUMNS = {"hardcore", "degenerate"}
_TEXT_COLUMNS = {"boundary", "commensurate"}


class SweepError(RuntimeError):
    pass


@dataclass(frozen=True)
class SweepResultRecord:
    """One grid point; ``None`` marks a quantity that was not computed."""

    schema_version: int
    M: int
    N: int
    n_max: int
    boundary: str
    hardcore: bool
    t1: float
    t2: float
    U: float
    Uprime: float
    E0: float
    gap: float | None
    degenerate: bool
    eta: float | None
    q_max: float | None
    commensurate: str | None
    Sq_norm: float | None
    kappa_bar: float | None
    Dxy_bar_kinetic: float | None
    Dxy_bar_current: float | None
    Dzz_bar: float | None
    E_half: float | None
    ggm: float | None
    ggm_argmax_bitmask: int | None
    solver_iters: int
    residual: float

    @property
    def key(self) -> tuple[str, ...]:
        return tuple(_format(getattr(self, c)) for c in KEY_COLUMNS)

    @property
    def ratio(self) -> float:
        return self.t1 / self.t2

    def to_row(self) -> list[str]:
        return [_format(getattr(self, c)) for c in COLUMNS]

    @classmethod
    def from_row(cls, row: dict[str, str]) -> "SweepResultRecord":
        return cls(**{c: _parse(c, row[c]) for c in COLUMNS})

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, obj: dict) -> "SweepResultRecord":
        return cls(**{c: obj[c] for c in COLUMNS})


assert tuple(f.name for f in fields(SweepResultRecord)) == COLUMNS


@dataclass(frozen=True)
class Note:
    t1: float
    Uprime: float
    kind: str  # "error" or "skipped"
    field: str
    message: str

    def to_row(self) -> list[str]:
        return [_format(self.t1), _format(self.Uprime), self.kind, self.field, self.message]


@dataclass(frozen=True)
class PointResult:
    index: int
    record: SweepResultRecord | None
    notes: tuple[Note, ...] = ()

    @property
    def failed(self) -> bool:
        return self.record is None


@dataclass(frozen=True)
class SweepOutcome:
    records: list[SweepResultRecord]
    notes: list[Note]
    n_points: int
    n_failed: int
    path: Path
    notes_path: Path

    @property
    def exit_code(self) -> int:
        if self.n_failed == 0:
            return 0
        return 2 if self.n_failed == self.n_points else 3


def _format(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def _parse(column: str, text: str):
    if text == "":
        return None
    if column in _BOOL_COLUMNS:
        if text not in ("true", "false"):
            raise SweepError(f"column {column}: expected true/false, got {text!r}")
        return text == "true"
    if column in _INT_COLUMNS:
        return int(text)
    if column in _TEXT_COLUMNS:
        return text
    return float(text)


def _finite(x: float) -> float | None:
    return float(x) if math.isfinite(x) else None


# --- single point ----------------------------------------------------------


def run_point(
    model: ModelConfig,
    t1: float,
    U: float,
    solver: SolverConfig = SolverConfig(),
    observables: ObservableConfig = ObservableConfig(),
    N_q: int = 1000,
    index: int = 0,
) -> PointResult:
    """Ground state and requested observables for one parameter set.

    Exceptions from the solver or an observable become an ``error`` note and
    a ``None`` record; they never propagate.
    """
    t2 = model.t2
    Uprime = U / abs(t2)
    notes: list[Note] = []

    def note(kind, field_, message):
        notes.append(Note(t1, Uprime, kind, field_, message))

    try:
        basis = FockBasis(model.M, model.N, model.n_max)
        params = CouplingParams(
            t1=t1, t2=t2, U=U, boundary=model.boundary, hardcore=model.hardcore,
            n_max=model.n_max,
        )
        H = build_hamiltonian(basis, params)
        gs = ground_state(H, tol=solver.tol, max_iter=solver.max_iter, seed=solver.seed)
        if model.boundary == "periodic" and gs.degenerate_flag:
            gs = resolve_momentum_sector(gs, H)

        eta = q_max = Sq = label = None
        if observables.momentum:
            prof = momentum_profile(gs, N_q)
            eta, q_max, Sq = prof.eta, prof.q_max, prof.S_q_normalized
            label = classify_commensurate(q_max)
        kappa = chiral_average(gs) if observables.chiral else None
        dk = dc = dzz = None
        if observables.dimer_xy:
            dk = dimer_average(gs, "xy", "kinetic")
            dc = dimer_average(gs, "xy", "current")
        if observables.dimer_zz:
            dzz = dimer_average(gs, "zz")
        e_half = None
        if observables.half_chain_entropy:
            if model.M % 2:
                note("skipped", "E_half", f"half-chain entropy needs even M, got M={model.M}")
            else:
                e_half = half_chain_entropy(gs)
        g = mask = None
        if observables.ggm:
            scope = observables.ggm_scope
            if scope == "all" and model.M > observables.ggm_ceiling:
                note(
                    "skipped", "ggm",
                    f"exhaustive GGM skipped: M={model.M} exceeds ceiling {observables.ggm_ceiling}",
                )
            else:
                g, part = ggm(gs, scope=scope, ceiling=observables.ggm_ceiling)
                mask = part.mask
    except Exception as exc:  # recorded per point; the sweep goes on
        note("error", type(exc).__name__, str(exc))
        return PointResult(index, None, tuple(notes))

    record = SweepResultRecord(
        schema_version=SCHEMA_VERSION,
        M=model.M, N=model.N, n_max=model.n_max, boundary=model.boundary,
        hardcore=model.hardcore, t1=float(t1), t2=float(t2), U=float(U), Uprime=float(Uprime),
        E0=gs.energy, gap=_finite(gs.gap_estimate), degenerate=gs.degenerate_flag,
        eta=eta, q_max=q_max, commensurate=label, Sq_norm=Sq, kappa_bar=kappa,
        Dxy_bar_kinetic=dk, Dxy_bar_current=dc, Dzz_bar=dzz, E_half=e_half,
        ggm=g, ggm_argmax_bitmask=mask, solver_iters=gs.iterations, residual=gs.residual_norm,
    )
    return PointResult(index, record, tuple(notes))


def planned_points(config: SweepConfig) -> list[tuple[float, float]]:
    """(t1, U) for every grid point, ratio-major."""
    t2 = config.model.t2
    return [(r * t2, u * abs(t2)) for r, u in config.grid()]


def _point_key(model: ModelConfig, t1: float, U: float) -> tuple[str, ...]:
    values = (model.M, model.N, model.n_max, model.boundary, model.hardcore, float(t1),
              float(model.t2), float(U))
    return tuple(_format(v) for v in values)


# --- serialization -----------------------------------------------------------


def notes_path_for(path: Path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".notes.csv")


def records_to_csv(records: Iterable[SweepResultRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for rec in records:
        writer.writerow(rec.to_row())
    return buf.getvalue()


def records_from_csv(text: str) -> list[SweepResultRecord]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != COLUMNS:
        raise SweepError(f"unexpected CSV header {reader.fieldnames}; expected schema {SCHEMA_VERSION}")
    return [SweepResultRecord.from_row(row) for row in reader]


def records_to_json(records: Iterable[SweepResultRecord]) -> str:
    return json.dumps([r.to_json() for r in records], indent=1, allow_nan=False) + "\n"


def records_from_json(text: str) -> list[SweepResultRecord]:
    data = json.loads(text)
    if not isinstance(data, list):
        raise SweepError("JSON output must be an array of records")
    return [SweepResultRecord.from_json(obj) for obj in data]


def read_records(path: str | Path) -> list[SweepResultRecord]:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json" or text.lstrip().startswith("["):
        return records_from_json(text)
    return records_from_csv(text)


def notes_to_csv(notes: Iterable[Note]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(NOTE_COLUMNS)
    for n in notes:
        writer.writerow(n.to_row())
    return buf.getvalue()


def notes_from_csv(text: str) -> list[Note]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != NOTE_COLUMNS:
        raise SweepError(f"unexpected notes header {reader.fieldnames}")
    return [
        Note(float(r["t1"]), float(r["Uprime"]), r["kind"], r["field"], r["message"])
        for r in reader
    ]


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def check_writable(path: Path) -> None:
    """Fail before any solve if ``path`` cannot be written."""
    path = Path(path)
    parent = path.parent if str(path.parent) else Path(".")
    if not parent.is_dir():
        raise SweepError(f"output directory {parent} does not exist")
    if path.exists() and (path.is_dir() or not os.access(path, os.W_OK)):
        raise SweepError(f"output path {path} is not a writable file")
    try:
        fd, tmp = tempfile.mkstemp(dir=parent, prefix=f".{path.name}.", suffix=".probe")
    except OSError as exc:
        raise SweepError(f"output directory {parent} is not writable: {exc}") from None
    os.close(fd)
    os.unlink(tmp)


# --- sweep --------------------------------------------------------------------


def _workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise SweepError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise SweepError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}")
    return n


def _load_previous(config: SweepConfig, keys: Sequence[tuple[str, ...]]):
    path = config.output.path
    done: dict[tuple[str, ...], SweepResultRecord] = {}
    if not path.exists() or path.stat().st_size == 0:
        return done, []
    text = path.read_text(encoding="utf-8")
    previous = records_from_json(text) if config.output.format == "json" else records_from_csv(text)
    wanted = set(keys)
    for rec in previous:
        if rec.key not in wanted:
            raise SweepError(
                f"{path} holds a point ({', '.join(rec.key)}) outside this sweep's grid; "
                "choose another output path"
            )
        done[rec.key] = rec
    notes: list[Note] = []
    npath = notes_path_for(path)
    if npath.exists():
        notes = notes_from_csv(npath.read_text(encoding="utf-8"))
    return done, notes


def run_sweep(config: SweepConfig, workers: int | None = None) -> SweepOutcome:
    """Evaluate every grid point and write the output and notes files.

    Points already present in an existing output file are not recomputed.
    Worker count defaults to the ``FRUSTBH_WORKERS`` environment variable.
    """
    path = Path(config.output.path)
    check_writable(path)
    npath = notes_path_for(path)
    check_writable(npath)
    workers = _workers() if workers is None else workers
    model = config.model
    points = planned_points(config)
    keys = [_point_key(model, t1, U) for t1, U in points]
    if len(set(keys)) != len(keys):
        raise SweepError("grid contains duplicate points")

    done, old_notes = _load_previous(config, keys)
    records: list[SweepResultRecord | None] = [done.get(k) for k in keys]
    point_notes: list[tuple[Note, ...]] = [()] * len(points)
    by_point: dict[tuple[str, str], list[Note]] = {}
    for n in old_notes:
        by_point.setdefault((_format(n.t1), _format(n.Uprime)), []).append(n)
    for i, (t1, U) in enumerate(points):
        if records[i] is not None:
            point_notes[i] = tuple(by_point.get((_format(t1), _format(U / abs(model.t2))), ()))
    todo = [i for i, r in enumerate(records) if r is None]
    if done:
        log.info("resuming: %d of %d points already in %s", len(done), len(points), path)

    failed: set[int] = set()

    def flush():
        finished = [r for r in records if r is not None]
        text = records_to_json(finished) if config.output.format == "json" else records_to_csv(finished)
        _atomic_write(path, text)
        _atomic_write(npath, notes_to_csv(n for ns in point_notes for n in ns))

    def accept(res: PointResult):
        records[res.index] = res.record
        point_notes[res.index] = res.notes
        if res.failed:
            failed.add(res.index)
            log.warning("point %d failed: %s", res.index, res.notes[-1].message)
        flush()

    args = [
        (model, points[i][0], points[i][1], config.solver, config.observables, config.output.N_q, i)
        for i in todo
    ]
    if workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run_point, *a) for a in args]
            for fut in as_completed(futures):
                accept(fut.result())
    else:
        for a in args:
            accept(run_point(*a))
    flush()

    return SweepOutcome(
        records=[r for r in records if r is not None],
        notes=[n for ns in point_notes for n in ns],
        n_points=len(points),
        n_failed=len(failed),
        path=path,
        notes_path=npath,
    )


# --- plot data ------------------------------------------------------------------

PLOT_QUANTITIES = tuple(
    c for c in COLUMNS[COLUMNS.index("E0"):] if c not in _TEXT_COLUMNS
)


def plot_matrix(
    records: Sequence[SweepResultRecord], quantity: str
) -> tuple[list[float], list[float], list[list[float | int | bool | None]]]:
    """(ratios, U' values, matrix[ratio][U']) for one quantity."""
    if quantity not in PLOT_QUANTITIES:
        raise SweepError(f"unknown quantity {quantity!r}; choose from {', '.join(PLOT_QUANTITIES)}")
    if not records:
        raise SweepError("no records")
    fixed = ("schema_version", "M", "N", "n_max", "boundary", "hardcore", "t2")
    ref = records[0]
    for rec in records[1:]:
        for f in fixed:
            if getattr(rec, f) != getattr(ref, f):
                raise SweepError(
                    f"records do not share one grid: {f} is {getattr(ref, f)!r} and {getattr(rec, f)!r}"
                )
    if all(getattr(r, quantity) is None for r in records):
        raise SweepError(f"quantity {quantity!r} was not computed in this sweep")
    ratios = sorted({r.ratio for r in records})
    uprimes = sorted({r.Uprime for r in records})
    cells: dict[tuple[float, float], object] = {}
    for r in records:
        k = (r.ratio, r.Uprime)
        if k in cells:
            raise SweepError(f"duplicate grid point t1/t2={k[0]!r}, U'={k[1]!r}")
        cells[k] = getattr(r, quantity)
    matrix = [[cells.get((a, u)) for u in uprimes] for a in ratios]
    return ratios, uprimes, matrix


def emit_plot_data(
    records: Sequence[SweepResultRecord], quantity: str, path: str | Path | None = None
) -> str:
    """CSV matrix, rows t1/t2 and columns U'; missing points are empty cells."""
    ratios, uprimes, matrix = plot_matrix(records, quantity)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"t1_over_t2\\Uprime:{quantity}"] + [_format(u) for u in uprimes])
    for a, row in zip(ratios, matrix):
        writer.writerow([_format(a)] + [_format(v) for v in row])
    text = buf.getvalue()
    if path is not None:
        path = Path(path)
        check_writable(path)
        _atomic_write(path, text)
    return text


def with_output(config: SweepConfig, path: Path, fmt: str | None = None) -> SweepConfig:
    out = replace(config.output, path=Path(path), format=fmt or config.output.format)
    return replace(config, output=out)
