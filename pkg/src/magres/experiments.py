"""Experiment orchestration: configuration, run fan-out and result files.

Every CSV written here starts with a ``# config=<json>`` line holding the
resolved configuration (minus output location and worker count), so an
output file can be fed back through ``--config`` to reproduce it.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import tempfile
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from magres.errors import ConfigError
from magres.evaluate import (
    EsnEncoding,
    decode_film,
    encode_film,
    evaluate_esn,
    evaluate_film,
    film_space,
)
from magres.esn import drive_esn
from magres.evolve import mga_run, random_search
from magres.film import INPUT_INTERVAL, ReservoirGenome, drive_film, leaky_filter, make_film, relax_film
from magres.materials import MATERIALS, get_material
from magres.metrics import kernel_rank, memory_capacity, wilcoxon_ranksum
from magres.tasks import load_task

log = logging.getLogger(__name__)

MODES = (
    "evolve",
    "random-search",
    "sweep-temperature",
    "sweep-scaling",
    "metrics",
    "impulse-demo",
    "timestep-compare",
)
GRID_SIDES = (5, 7, 10, 15, 20, 30)
TASKS = ("laser", "narma10", "narma30")
RESERVOIRS = ("film", "esn", "lattice")
DEFAULT_TEMPERATURES = (0.0, 0.28, 4.2, 30.0, 77.0, 200.0, 300.0)
DEFAULT_THICKNESSES = (0.1, 0.5, 1.0, 2.0)

RESULT_FIELDS = [
    "material", "task", "grid_side", "temperature_k", "thickness_nm",
    "run", "val_nmse", "test_nmse", "kr", "mc",
]
HISTORY_FIELDS = ["run", "tournament", "best_val_nmse", "best_test_nmse", "genome_id"]
GROUP_KEYS = ["material", "task", "grid_side", "temperature_k", "thickness_nm"]

DESK = {"pop": 20, "tournaments": 200, "runs": 3, "batch": 100, "batches": 3, "configs": 5}
PAPER = {"pop": 100, "tournaments": 2000, "runs": 20, "batch": 2000, "batches": 20, "configs": 30}
# keys that never influence results and are left out of embedded configs
NON_RESULT_KEYS = ("out", "jobs")


@dataclass
class ExperimentConfig:
    mode: str = "evolve"
    reservoir: str = "film"
    material: str = "Co"
    grid_side: int = 7
    task: str = "narma10"
    temp_k: float = 0.0
    thickness_nm: float = 0.1
    dt_fs: float = 100.0
    seed: int = 0
    out: str = "results"
    laser_file: str | None = None
    budget: str = "desk"
    pop: int | None = None
    tournaments: int | None = None
    runs: int | None = None
    batch: int | None = None
    batches: int | None = None
    configs: int | None = None
    mut: float = 0.05
    rec: float = 0.5
    deme: float = 0.1
    jobs: int = 1
    temperatures: list[float] = field(default_factory=lambda: list(DEFAULT_TEMPERATURES))
    thicknesses: list[float] = field(default_factory=lambda: list(DEFAULT_THICKNESSES))
    sides: list[int] = field(default_factory=lambda: [5, 7, 10])
    with_metrics: bool = False
    literal_delta: bool = False
    evolve_weights: bool = False
    genome_file: str | None = None
    impulse_every: int = 25
    impulse_count: int = 3
    impulse_amplitude: float = 1.0
    snapshot_components: str = "z"
    dipole_cutoff_nm: float | None = None
    narma_length: int = 5000

    def __post_init__(self):
        scale = PAPER if self.budget == "paper" else DESK
        for key, value in scale.items():
            if getattr(self, key) is None:
                setattr(self, key, value)

    def validate(self) -> "ExperimentConfig":
        errors = []
        if self.mode not in MODES:
            errors.append(f"mode: {self.mode!r} not in {MODES}")
        if self.reservoir not in RESERVOIRS:
            errors.append(f"reservoir: {self.reservoir!r} not in {RESERVOIRS}")
        if self.material not in MATERIALS:
            errors.append(f"material: {self.material!r} not in {sorted(MATERIALS)}")
        if self.grid_side not in GRID_SIDES:
            errors.append(f"grid_side: {self.grid_side} not in {GRID_SIDES}")
        if any(s not in GRID_SIDES for s in self.sides):
            errors.append(f"sides: every entry must be in {GRID_SIDES}")
        if self.task not in TASKS:
            errors.append(f"task: {self.task!r} not in {TASKS}")
        if self.budget not in ("desk", "paper"):
            errors.append("budget: must be 'desk' or 'paper'")
        if self.temp_k < 0 or any(t < 0 for t in self.temperatures):
            errors.append("temp_k: temperatures must be >= 0")
        if self.thickness_nm <= 0 or any(t <= 0 for t in self.thicknesses):
            errors.append("thickness_nm: must be > 0")
        if self.dt_fs <= 0:
            errors.append("dt_fs: must be > 0")
        else:
            ratio = INPUT_INTERVAL / (self.dt_fs * 1e-15)
            if abs(ratio - round(ratio)) > 1e-9:
                errors.append("dt_fs: must divide the 10 ps input interval")
        for key in ("pop", "tournaments", "runs", "batch", "batches", "configs", "jobs"):
            if getattr(self, key) < 1:
                errors.append(f"{key}: must be >= 1")
        if self.narma_length < 200:
            errors.append("narma_length: must be >= 200")
        if self.pop < 2:
            errors.append("pop: must be >= 2")
        for key in ("mut", "rec", "deme"):
            if not 0 <= getattr(self, key) <= 1:
                errors.append(f"{key}: must lie in [0, 1]")
        if self.task == "laser" and not (self.laser_file and Path(self.laser_file).exists()):
            errors.append("laser_file: task 'laser' needs an existing laser data file")
        if self.genome_file and not Path(self.genome_file).exists():
            errors.append(f"genome_file: {self.genome_file} does not exist")
        if errors:
            raise ConfigError("; ".join(errors))
        return self

    def to_dict(self, embedded: bool = False) -> dict:
        d = asdict(self)
        if embedded:
            for key in NON_RESULT_KEYS:
                d.pop(key)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known - {"derived_seeds"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**{k: v for k, v in data.items() if k in known})


def load_config_file(path) -> dict:
    """Read a JSON config, or the embedded config of a result file."""
    text = Path(path).read_text()
    first = text.splitlines()[0] if text else ""
    if first.startswith("# config="):
        data = json.loads(first[len("# config="):])
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not a JSON config: {exc}") from None
        if "config" in data and isinstance(data["config"], dict):
            data = data["config"]
    data.pop("derived_seeds", None)
    return data


def derive_seed(master: int, *key: int) -> int:
    """Counter-based child seed: independent streams per (purpose, index) key."""
    return int(np.random.SeedSequence(master, spawn_key=tuple(key)).generate_state(1)[0])


TASK_KEY, RUN_KEY, THERMAL_KEY, ESN_KEY = 1, 2, 3, 4


def embedded_config(cfg: ExperimentConfig) -> dict:
    d = cfg.to_dict(embedded=True)
    d["derived_seeds"] = {
        "task": derive_seed(cfg.seed, TASK_KEY),
        "runs": [derive_seed(cfg.seed, RUN_KEY, r) for r in range(cfg.runs)],
    }
    return d


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return "" if np.isnan(v) else repr(v)
    return str(v)


def write_csv(path, rows: list[dict], header: list[str], cfg: ExperimentConfig) -> Path:
    buf = io.StringIO()
    buf.write("# config=" + json.dumps(embedded_config(cfg), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(row.get(k, "")) for k in header])
    path = Path(path)
    _atomic_write(path, buf.getvalue())
    return path


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def write_json(path, payload: dict, cfg: ExperimentConfig) -> Path:
    path = Path(path)
    body = {"config": embedded_config(cfg), **payload}
    _atomic_write(path, json.dumps(body, indent=2, sort_keys=True) + "\n")
    return path


def summarise(rows: list[dict]) -> list[dict]:
    """Median and quartiles of val/test NMSE per (material, task, size, T, thickness)."""
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        groups.setdefault(tuple(row[k] for k in GROUP_KEYS), []).append(row)
    out = []
    for key, members in groups.items():
        entry = dict(zip(GROUP_KEYS, key))
        entry["n_runs"] = len(members)
        for metric in ("val_nmse", "test_nmse"):
            values = np.array([float(m[metric]) for m in members if m[metric] != ""])
            if values.size:
                q1, med, q3 = np.percentile(values, [25, 50, 75])
            else:
                q1 = med = q3 = float("nan")
            entry[f"{metric}_median"] = float(med)
            entry[f"{metric}_q1"] = float(q1)
            entry[f"{metric}_q3"] = float(q3)
        out.append(entry)
    return out


SUMMARY_FIELDS = GROUP_KEYS + ["n_runs"] + [
    f"{m}_{s}" for m in ("val_nmse", "test_nmse") for s in ("median", "q1", "q3")
]


def write_results(out: Path, rows: list[dict], cfg: ExperimentConfig) -> None:
    results = write_csv(out / "results.csv", rows, RESULT_FIELDS, cfg)
    # summary is recomputed from the file as written so the two always agree
    write_csv(out / "summary.csv", summarise(read_csv(results)), SUMMARY_FIELDS, cfg)


# ---------------------------------------------------------------- builders


def film_template(cfg: ExperimentConfig, side: int | None = None, temp_k=None, thickness_nm=None,
                  dt_fs=None, thermal_seed: int = 0) -> ReservoirGenome:
    side = side or cfg.grid_side
    cutoff = None if cfg.dipole_cutoff_nm is None else cfg.dipole_cutoff_nm * 1e-9
    return ReservoirGenome(
        w_in=np.zeros((side * side, 2)),
        material=get_material(cfg.material),
        side=side,
        thickness=(cfg.thickness_nm if thickness_nm is None else thickness_nm) * 1e-9,
        temperature=cfg.temp_k if temp_k is None else temp_k,
        dt=(cfg.dt_fs if dt_fs is None else dt_fs) * 1e-15,
        thermal_seed=thermal_seed,
        dipole_cutoff=cutoff,
    )


def task_for(cfg: ExperimentConfig):
    return load_task(cfg.task, derive_seed(cfg.seed, TASK_KEY), cfg.laser_file, cfg.literal_delta,
                     cfg.narma_length)


class FilmObjective:
    def __init__(self, template: ReservoirGenome, task):
        self.template = template
        self.task = task

    def genome(self, vec):
        return decode_film(vec, self.template)

    def __call__(self, vec):
        return evaluate_film(self.genome(vec), self.task)


class EsnObjective:
    def __init__(self, encoding: EsnEncoding, task):
        self.encoding = encoding
        self.task = task

    def __call__(self, vec):
        return evaluate_esn(self.encoding.decode(vec), self.task)


def objective(cfg: ExperimentConfig, task, side: int, run: int):
    if cfg.reservoir == "film":
        seed = derive_seed(cfg.seed, THERMAL_KEY, run)
        return FilmObjective(film_template(cfg, side, thermal_seed=seed), task), None
    enc = EsnEncoding(side * side, "lattice" if cfg.reservoir == "lattice" else "random",
                      cfg.evolve_weights, base_seed=derive_seed(cfg.seed, ESN_KEY, run))
    return EsnObjective(enc, task), enc


def space_for(cfg: ExperimentConfig, side: int, enc):
    return film_space(side * side) if cfg.reservoir == "film" else enc.space()


def reservoir_fn(cfg: ExperimentConfig, obj, vec):
    """State-matrix callable for metrics."""
    if cfg.reservoir == "film":
        genome = obj.genome(vec)
        film = make_film(genome)
        start = relax_film(genome, film)

        def run(u):
            return leaky_filter(drive_film(genome, u, start.copy(), film=film), genome.leak_a)

        return run
    esn = obj.encoding.decode(vec)
    return lambda u: drive_esn(esn, u)


def _metrics(cfg, obj, vec, seed):
    if not cfg.with_metrics:
        return float("nan"), float("nan")
    fn = reservoir_fn(cfg, obj, vec)
    return kernel_rank(fn, seed=seed), memory_capacity(fn, seed=seed)


def _row(cfg, run, val, test, side=None, material=None, temp=None, thick=None, kr=float("nan"),
         mc=float("nan"), task=None):
    return {
        "material": material or (cfg.material if cfg.reservoir == "film" else cfg.reservoir),
        "task": task or cfg.task,
        "grid_side": side or cfg.grid_side,
        "temperature_k": float(cfg.temp_k if temp is None else temp),
        "thickness_nm": float(cfg.thickness_nm if thick is None else thick),
        "run": run,
        "val_nmse": float(val),
        "test_nmse": float(test),
        "kr": kr,
        "mc": mc,
    }


# ---------------------------------------------------------------- per-run workers


def _evolve_run(cfg_dict: dict, run: int, side: int | None = None, reservoir: str | None = None) -> dict:
    cfg = ExperimentConfig.from_dict(cfg_dict)
    if reservoir:
        cfg.reservoir = reservoir
    side = side or cfg.grid_side
    task = task_for(cfg)
    obj, enc = objective(cfg, task, side, run)
    res = mga_run(obj, space_for(cfg, side, enc), cfg.pop, cfg.tournaments, cfg.mut, cfg.rec,
                  cfg.deme, seed=derive_seed(cfg.seed, RUN_KEY, run), run=run)
    kr, mc = _metrics(cfg, obj, res.best, derive_seed(cfg.seed, RUN_KEY, run))
    return {
        "row": _row(cfg, run, res.best_val_nmse, res.best_test_nmse, side=side, kr=kr, mc=mc),
        "history": [asdict(h) for h in res.history],
        "best": res.best.tolist(),
        "reservoir": cfg.reservoir,
        "side": side,
    }


def _random_search_batch(cfg_dict: dict, batch: int) -> dict:
    cfg = ExperimentConfig.from_dict(cfg_dict)
    task = task_for(cfg)
    obj, enc = objective(cfg, task, cfg.grid_side, batch)
    (best,) = random_search(obj, space_for(cfg, cfg.grid_side, enc), cfg.batch, 1,
                            seeds=[derive_seed(cfg.seed, RUN_KEY, batch)])
    kr, mc = _metrics(cfg, obj, best.best, derive_seed(cfg.seed, RUN_KEY, batch))
    return {"row": _row(cfg, batch, best.val_nmse, best.test_nmse, kr=kr, mc=mc), "best": best.best.tolist()}


def _timestep_config(cfg_dict: dict, k: int) -> dict:
    cfg = ExperimentConfig.from_dict(cfg_dict)
    task = task_for(cfg)
    rng = np.random.default_rng(derive_seed(cfg.seed, RUN_KEY, k))
    vec = film_space(cfg.grid_side**2).sample(rng)
    out = {"config": k}
    for dt in (1.0, 100.0):
        g = decode_film(vec, film_template(cfg, dt_fs=dt, thermal_seed=derive_seed(cfg.seed, THERMAL_KEY, k)))
        try:
            s = evaluate_film(g, task)
            out[f"val_nmse_{dt:g}fs"], out[f"test_nmse_{dt:g}fs"] = s.val_nmse, s.test_nmse
        except Exception as exc:
            log.warning("config %d at %g fs failed: %s", k, dt, exc)
            out[f"val_nmse_{dt:g}fs"] = out[f"test_nmse_{dt:g}fs"] = float("inf")
    return out


def _map(fn, cfg: ExperimentConfig, items, *extra):
    """Run ``fn(cfg_dict, item, *extra)`` over items; returns (results, errors)."""
    cfg_dict = cfg.to_dict()
    results, errors = {}, {}
    if cfg.jobs == 1:
        for item in items:
            try:
                results[item] = fn(cfg_dict, item, *extra)
            except Exception:
                errors[item] = traceback.format_exc()
    else:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            futures = {item: pool.submit(fn, cfg_dict, item, *extra) for item in items}
            for item, fut in futures.items():
                try:
                    results[item] = fut.result()
                except Exception:
                    errors[item] = traceback.format_exc()
    return results, errors


# ---------------------------------------------------------------- modes


def _genome_payload(genome: ReservoirGenome) -> dict:
    return {
        "w_in": genome.w_in.tolist(),
        "b": genome.b,
        "alpha_damping": genome.alpha_damping,
        "leak_a": genome.leak_a,
        "material": genome.material.name,
        "side": genome.side,
    }


def load_genome(path, cfg: ExperimentConfig) -> ReservoirGenome:
    data = json.loads(Path(path).read_text())
    g = data.get("genome", data.get("genomes", data))
    if isinstance(g, list):
        g = g[0]
    template = film_template(cfg, side=int(g["side"]))
    return template.replace(
        w_in=np.asarray(g["w_in"], float), b=g["b"], alpha_damping=g["alpha_damping"], leak_a=g["leak_a"],
        material=get_material(g.get("material", cfg.material)),
    )


def run_evolve(cfg: ExperimentConfig, out: Path) -> dict:
    results, errors = _map(_evolve_run, cfg, range(cfg.runs))
    rows = [results[r]["row"] for r in sorted(results)]
    history = [h for r in sorted(results) for h in results[r]["history"]]
    write_results(out, rows, cfg)
    write_csv(out / "history.csv", history, HISTORY_FIELDS, cfg)
    best = {str(r): results[r]["best"] for r in sorted(results)}
    payload = {"best_genotypes": best}
    if cfg.reservoir == "film":
        payload["genomes"] = [
            _genome_payload(decode_film(np.array(results[r]["best"]), film_template(cfg)))
            for r in sorted(results)
        ]
    write_json(out / "best_genomes.json", payload, cfg)
    return errors


def run_random_search(cfg: ExperimentConfig, out: Path) -> dict:
    results, errors = _map(_random_search_batch, cfg, range(cfg.batches))
    write_results(out, [results[b]["row"] for b in sorted(results)], cfg)
    write_json(out / "best_genomes.json", {"best_genotypes": {str(b): results[b]["best"] for b in sorted(results)}}, cfg)
    return errors


def _sweep_temperature_run(cfg_dict: dict, run: int) -> dict:
    cfg = ExperimentConfig.from_dict(cfg_dict)
    task = task_for(cfg)
    if cfg.genome_file:
        genome = load_genome(cfg.genome_file, cfg)
    else:
        base = film_template(cfg, temp_k=0.0, thickness_nm=cfg.thicknesses[0])
        obj = FilmObjective(base, task)
        res = mga_run(obj, film_space(base.n_cells), cfg.pop, cfg.tournaments, cfg.mut, cfg.rec, cfg.deme,
                      seed=derive_seed(cfg.seed, RUN_KEY, run), run=run)
        genome = obj.genome(res.best)
    rows = []
    for thick in cfg.thicknesses:
        for temp in cfg.temperatures:
            g = genome.replace(temperature=float(temp), thickness=thick * 1e-9,
                               thermal_seed=derive_seed(cfg.seed, THERMAL_KEY, run))
            try:
                s = evaluate_film(g, task)
                val, test = s.val_nmse, s.test_nmse
            except Exception as exc:
                log.warning("T=%s K, %s nm failed: %s", temp, thick, exc)
                val = test = float("inf")
            rows.append(_row(cfg, run, val, test, temp=temp, thick=thick, side=genome.side))
    return {"rows": rows, "genome": _genome_payload(genome)}


def run_sweep_temperature(cfg: ExperimentConfig, out: Path) -> dict:
    if cfg.reservoir != "film":
        raise ConfigError("reservoir: sweep-temperature needs a film reservoir")
    runs = range(1) if cfg.genome_file else range(cfg.runs)
    results, errors = _map(_sweep_temperature_run, cfg, runs)
    rows = [row for r in sorted(results) for row in results[r]["rows"]]
    write_results(out, rows, cfg)
    write_json(out / "best_genomes.json", {"genomes": [results[r]["genome"] for r in sorted(results)]}, cfg)
    return errors


def run_sweep_scaling(cfg: ExperimentConfig, out: Path) -> dict:
    rows, errors = [], {}
    reservoirs = [cfg.reservoir] if cfg.reservoir != "film" else ["film", "esn"]
    for side in cfg.sides:
        for res_kind in reservoirs:
            results, errs = _map(_evolve_run, cfg, range(cfg.runs), side, res_kind)
            rows += [results[r]["row"] for r in sorted(results)]
            errors.update({(side, res_kind, k): v for k, v in errs.items()})
    write_results(out, rows, cfg)
    return errors


def run_metrics(cfg: ExperimentConfig, out: Path) -> dict:
    rows = []
    for run in range(cfg.runs):
        seed = derive_seed(cfg.seed, RUN_KEY, run)
        rng = np.random.default_rng(seed)
        if cfg.genome_file and cfg.reservoir == "film":
            genome = load_genome(cfg.genome_file, cfg)
            fn = reservoir_fn(cfg, FilmObjective(genome, None), encode_film(genome))
        else:
            obj, enc = objective(cfg, None, cfg.grid_side, run)
            vec = space_for(cfg, cfg.grid_side, enc).sample(rng)
            fn = reservoir_fn(cfg, obj, vec)
        rows.append(_row(cfg, run, float("nan"), float("nan"), task="none",
                         kr=kernel_rank(fn, seed=seed), mc=memory_capacity(fn, seed=seed)))
    write_csv(out / "results.csv", rows, RESULT_FIELDS, cfg)
    return {}


def impulse_inputs(n_steps: int, every: int, count: int, start: int = 10) -> np.ndarray:
    u = np.zeros(n_steps)
    for k in range(count):
        t = start + k * every
        if t < n_steps:
            u[t] = 1.0
    return u


def run_impulse_demo(cfg: ExperimentConfig, out: Path) -> dict:
    side = cfg.grid_side
    n = side * side
    centre = (side // 2) * side + side // 2
    w_in = np.zeros((n, 2))
    w_in[centre, 0] = cfg.impulse_amplitude
    genome = film_template(cfg, thermal_seed=derive_seed(cfg.seed, THERMAL_KEY, 0)).replace(
        w_in=w_in, b=1.0, alpha_damping=0.1, leak_a=1.0
    )
    if cfg.genome_file:
        genome = load_genome(cfg.genome_file, cfg)
    n_steps = 10 + cfg.impulse_every * cfg.impulse_count + cfg.impulse_every
    u = impulse_inputs(n_steps, cfg.impulse_every, cfg.impulse_count)
    states = drive_film(genome, u, snapshot_dir=out / "snapshots",
                        snapshot_components=cfg.snapshot_components)
    mz = states[:, 2::3]
    rows = [{"step": t, "input": u[t], **{f"mz_{i}": mz[t, i] for i in range(n)}} for t in range(n_steps)]
    write_csv(out / "impulse_mz.csv", rows, ["step", "input"] + [f"mz_{i}" for i in range(n)], cfg)
    return {}


def run_timestep_compare(cfg: ExperimentConfig, out: Path) -> dict:
    if cfg.reservoir != "film":
        raise ConfigError("reservoir: timestep-compare needs a film reservoir")
    results, errors = _map(_timestep_config, cfg, range(cfg.configs))
    rows = [results[k] for k in sorted(results)]
    header = ["config", "val_nmse_1fs", "test_nmse_1fs", "val_nmse_100fs", "test_nmse_100fs"]
    write_csv(out / "timestep.csv", rows, header, cfg)
    a = [r["test_nmse_1fs"] for r in rows]
    b = [r["test_nmse_100fs"] for r in rows]
    p = wilcoxon_ranksum(a, b) if len(rows) >= 2 else float("nan")
    write_csv(out / "pvalue.csv", [{"task": cfg.task, "n_configs": len(rows), "p_value": p}],
              ["task", "n_configs", "p_value"], cfg)
    return errors


RUNNERS = {
    "evolve": run_evolve,
    "random-search": run_random_search,
    "sweep-temperature": run_sweep_temperature,
    "sweep-scaling": run_sweep_scaling,
    "metrics": run_metrics,
    "impulse-demo": run_impulse_demo,
    "timestep-compare": run_timestep_compare,
}


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Execute ``cfg.mode``; returns a mapping of failed run ids to tracebacks."""
    cfg.validate()
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        errors = RUNNERS[cfg.mode](cfg, out)
    except ConfigError:
        raise
    except Exception:
        _atomic_write(out / "errors.log", f"mode {cfg.mode}:\n{traceback.format_exc()}")
        raise
    if errors:
        text = "\n".join(f"run {k}:\n{v}" for k, v in errors.items())
        _atomic_write(out / "errors.log", text)
    return errors
