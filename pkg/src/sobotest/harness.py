"""Monte Carlo power experiments over rotationally symmetric alternatives.

An experiment sweeps a grid of (test, sample size, rate exponent, tau)
cells.  Each cell draws M independent samples with concentration
kappa = tau * n**(-1/ell), runs the requested test at level alpha, and
records the rejection frequency next to the asymptotic power of the test
whenever the cell sits exactly on the test's detection threshold
(ell = 2 k_star); every other cell is flagged trivial.

Replicate streams are keyed by (base_seed, test index, n, ell, tau index,
replicate index), so any cell can be reproduced in isolation and the
resulting table is byte-identical for every parallelism degree.
"""

import configparser
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

from .asymptotics import classify_threshold, limit_law, power_curve
from .rng import stream
from .rotsym import AngularFunction, RotSymConfig, cauchy, power, sample_rotsym, vmf, watson
from .sobolev import WeightSequence, run_test

_NAMED_TESTS = {
    "rayleigh": 1,
    "bingham": 2,
    "3-test": 3,
}


def angular_function(f_id: str, b: int = 3) -> AngularFunction:
    """Resolve an angular function id; `power` takes its exponent from b."""
    if f_id == "vmf":
        return vmf()
    if f_id == "watson":
        return watson()
    if f_id == "cauchy":
        return cauchy()
    if f_id == "power":
        return power(b)
    raise ValueError(f"unknown angular function {f_id!r}; "
                     "expected vmf, watson, power, or cauchy")


def parse_weights(text: str) -> WeightSequence:
    """Weight sequence from a name (rayleigh, bingham, 3-test) or a
    comma-separated list of weights for degrees 1, 2, ..."""
    name = text.strip()
    if name in _NAMED_TESTS:
        return WeightSequence.delta(_NAMED_TESTS[name], name=name)
    try:
        values = [float(v) for v in name.split(",") if v.strip()]
    except ValueError:
        raise ValueError(f"unknown test {text!r}; expected one of "
                         f"{sorted(_NAMED_TESTS)} or a comma-separated "
                         "weight list") from None
    if not values:
        raise ValueError("empty weight list")
    label = "weights(" + " ".join(format(v, "g") for v in values) + ")"
    return WeightSequence.finite(values, name=label)


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one power study."""

    p: int
    f_id: str
    b: int = 3
    tests: tuple = ("rayleigh", "bingham", "3-test")
    n_list: tuple = (500, 5000)
    rate_exponents: tuple = (2, 4, 6, 12)
    tau_grid: tuple = (0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0,
                       3.5, 4.0, 4.5, 5.0, 5.5, 6.0)
    replicates: int = 2000
    alpha: float = 0.05
    base_seed: int = 0
    parallelism: int = 1

    def __post_init__(self):
        if self.p < 2:
            raise ValueError(f"p must be >= 2, got {self.p}")
        angular_function(self.f_id, self.b)
        if self.b < 1:
            raise ValueError(f"b must be >= 1, got {self.b}")
        if not self.tests:
            raise ValueError("tests must be nonempty")
        for t in self.tests:
            parse_weights(t)
        if not self.n_list or any(n < 1 for n in self.n_list):
            raise ValueError(f"sample sizes must be >= 1, got {self.n_list}")
        if not self.rate_exponents or any(e < 1 for e in self.rate_exponents):
            raise ValueError(
                f"rate exponents must be >= 1, got {self.rate_exponents}")
        if not self.tau_grid or any(t < 0.0 for t in self.tau_grid):
            raise ValueError(f"tau grid must be >= 0, got {self.tau_grid}")
        if self.replicates < 1:
            raise ValueError(f"replicates must be >= 1, got {self.replicates}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.parallelism < 1:
            raise ValueError(f"parallelism must be >= 1, got {self.parallelism}")

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        """Parse a flat `key = value` file with an [experiment] section.

        Multiple tests are separated by semicolons so that explicit
        weight lists can keep their commas: `tests = rayleigh; 1,0.5`.
        """
        parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
        try:
            with open(path, "r", encoding="utf-8") as fh:
                parser.read_file(fh)
        except configparser.Error as exc:
            raise ValueError(f"malformed config file {path}: {exc}") from exc
        if "experiment" not in parser:
            raise ValueError(f"config file {path} lacks an [experiment] section")
        sec = parser["experiment"]
        try:
            kwargs = {
                "p": sec.getint("p"),
                "f_id": sec.get("f"),
            }
        except (TypeError, ValueError) as exc:
            raise ValueError(f"config file {path} needs integer p and f id: "
                             f"{exc}") from exc
        if kwargs["p"] is None or kwargs["f_id"] is None:
            raise ValueError(f"config file {path} must set p and f")
        try:
            if "b" in sec:
                kwargs["b"] = sec.getint("b")
            if "tests" in sec:
                kwargs["tests"] = tuple(
                    t.strip() for t in sec.get("tests").split(";") if t.strip())
            if "n_list" in sec:
                kwargs["n_list"] = tuple(
                    int(v) for v in sec.get("n_list").split(","))
            if "rate_exponents" in sec:
                kwargs["rate_exponents"] = tuple(
                    int(v) for v in sec.get("rate_exponents").split(","))
            if "tau_grid" in sec:
                kwargs["tau_grid"] = tuple(
                    float(v) for v in sec.get("tau_grid").split(","))
            if "replicates" in sec:
                kwargs["replicates"] = sec.getint("replicates")
            if "alpha" in sec:
                kwargs["alpha"] = sec.getfloat("alpha")
            if "base_seed" in sec:
                kwargs["base_seed"] = sec.getint("base_seed")
            if "parallelism" in sec:
                kwargs["parallelism"] = sec.getint("parallelism")
        except ValueError as exc:
            raise ValueError(f"malformed value in config file {path}: "
                             f"{exc}") from exc
        return cls(**kwargs)


@dataclass(frozen=True)
class PowerRow:
    test: str
    n: int
    ell: int
    tau: float
    reject_freq: float
    mc_se: float
    asym_power: Optional[float]
    trivial: bool


_CSV_HEADER = "test,n,ell,tau,reject_freq,mc_se,asym_power,trivial"


def _fmt(value: float) -> str:
    return format(float(value), ".10g")


@dataclass(frozen=True)
class PowerTable:
    """Rejection frequencies with asymptotic references, CSV round-trip."""

    rows: tuple

    def __post_init__(self):
        for row in self.rows:
            if not 0.0 <= row.reject_freq <= 1.0:
                raise ValueError(
                    f"rejection frequency out of range: {row.reject_freq}")
            if "," in row.test or "\n" in row.test:
                raise ValueError(f"test label not CSV-safe: {row.test!r}")

    def to_csv(self) -> str:
        lines = [_CSV_HEADER]
        for r in self.rows:
            asym = "" if r.asym_power is None else _fmt(r.asym_power)
            flag = "true" if r.trivial else "false"
            lines.append(f"{r.test},{r.n},{r.ell},{_fmt(r.tau)},"
                         f"{_fmt(r.reject_freq)},{_fmt(r.mc_se)},{asym},{flag}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "PowerTable":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0] != _CSV_HEADER:
            raise ValueError(f"expected header {_CSV_HEADER!r}")
        rows = []
        for ln in lines[1:]:
            parts = ln.split(",")
            if len(parts) != 8:
                raise ValueError(f"malformed power table row: {ln!r}")
            test, n, ell, tau, freq, se, asym, flag = parts
            if flag not in ("true", "false"):
                raise ValueError(f"malformed trivial flag in row: {ln!r}")
            try:
                rows.append(PowerRow(
                    test=test, n=int(n), ell=int(ell), tau=float(tau),
                    reject_freq=float(freq), mc_se=float(se),
                    asym_power=None if asym == "" else float(asym),
                    trivial=(flag == "true")))
            except ValueError as exc:
                raise ValueError(f"malformed power table row {ln!r}: "
                                 f"{exc}") from exc
        return cls(tuple(rows))


class _Engine:
    """Per-process experiment state: tests, null laws, sampler inputs."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.f = angular_function(config.f_id, config.b)
        # label rows by the parsed name: explicit weight lists get a
        # comma-free form so the table stays CSV-safe
        self.tests = []
        for name in config.tests:
            weights = parse_weights(name)
            self.tests.append((weights.name, weights))
        self.laws = []
        for _, weights in self.tests:
            law = limit_law(weights, config.p)
            law.quantile(config.alpha)
            self.laws.append(law)

    def run_cell(self, cell) -> tuple:
        ti, n, ell, taui = cell
        cfg = self.config
        tau = cfg.tau_grid[taui]
        kappa = tau * float(n) ** (-1.0 / ell)
        _, weights = self.tests[ti]
        cell_seed = int(stream(cfg.base_seed, ti, n, ell, taui).integers(
            0, 2**63 - 1))
        sampler = RotSymConfig(p=cfg.p, kappa=kappa, f=self.f, seed=cell_seed)
        rejects = 0
        for replicate in range(cfg.replicates):
            sample = sample_rotsym(sampler, n, replicate=replicate)
            result = run_test(sample, weights, cfg.alpha, self.laws[ti])
            rejects += result.reject
        freq = rejects / cfg.replicates
        se = math.sqrt(freq * (1.0 - freq) / cfg.replicates)
        return freq, se


_POOL_ENGINE = None


def _bind_pool_engine(config: ExperimentConfig) -> None:
    global _POOL_ENGINE
    _POOL_ENGINE = _Engine(config)


def _pool_run_cell(cell):
    return _POOL_ENGINE.run_cell(cell)


def _asymptotic_references(config: ExperimentConfig, engine: _Engine) -> dict:
    """Per (test index, ell): asymptotic power along the tau grid when the
    cell sits on the detection threshold, None otherwise."""
    refs = {}
    for ti, (_, weights) in enumerate(engine.tests):
        for ell in config.rate_exponents:
            horizon = max(1, ell // 2)
            report = classify_threshold(weights, engine.f, horizon)
            on_threshold = (report.case != "blind"
                            and 2 * report.k_star == ell)
            if on_threshold:
                curve = power_curve(weights, config.p, engine.f,
                                    config.tau_grid, config.alpha, q=horizon)
                refs[ti, ell] = [row.power for row in curve]
            else:
                refs[ti, ell] = None
    return refs


def run_power_experiment(config: ExperimentConfig) -> PowerTable:
    """Rejection frequencies over the full (test, n, ell, tau) grid.

    Deterministic in config.base_seed for every parallelism degree; the
    per-test null law is built once and shared by all replicates.
    """
    engine = _Engine(config)
    refs = _asymptotic_references(config, engine)
    cells = [(ti, n, ell, taui)
             for ti in range(len(engine.tests))
             for n in config.n_list
             for ell in config.rate_exponents
             for taui in range(len(config.tau_grid))]
    if config.parallelism > 1:
        with ProcessPoolExecutor(max_workers=config.parallelism,
                                 initializer=_bind_pool_engine,
                                 initargs=(config,)) as pool:
            outcomes = list(pool.map(_pool_run_cell, cells))
    else:
        outcomes = [engine.run_cell(cell) for cell in cells]
    rows = []
    for cell, (freq, se) in zip(cells, outcomes):
        ti, n, ell, taui = cell
        curve = refs[ti, ell]
        rows.append(PowerRow(
            test=engine.tests[ti][0], n=n, ell=ell,
            tau=config.tau_grid[taui], reject_freq=freq, mc_se=se,
            asym_power=None if curve is None else curve[taui],
            trivial=curve is None))
    return PowerTable(tuple(rows))
