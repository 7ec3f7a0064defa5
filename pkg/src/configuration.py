import logging
import os
from enum import StrEnum

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from bounders import DEFAULT_INFLATION, DEFAULT_REPLICATIONS, BounderKind
from criteria import MetricKind
from exceptions import UsageError
from problems import all_subsets, singletons
from sequences import Randomization, SequenceKind
from system_resources import detect_worker_count

SEED_ENV = "QMCQOI_SEED"
DEFAULT_SEED = 7


class Command(StrEnum):
    INTEGRATE = "integrate"
    SENSITIVITY = "sensitivity"
    POSTERIOR_MEAN = "posterior-mean"
    QEI = "qei"
    CONVERGENCE = "convergence"


class OutputFormat(StrEnum):
    JSON = "json"
    CSV = "csv"


PRESETS = {
    Command.INTEGRATE: ("product", "linear", "constant"),
    Command.CONVERGENCE: ("product", "linear", "constant"),
    Command.SENSITIVITY: ("ishigami", "additive", "constant"),
    Command.POSTERIOR_MEAN: ("conjugate-gaussian",),
    Command.QEI: ("half-normal",),
}


def _split(value: str, separator: str) -> list[str]:
    return [part.strip() for part in value.split(separator) if part.strip()]


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    command: Command = Command.INTEGRATE
    preset: str | None = None
    sequence: SequenceKind = SequenceKind.LATTICE
    randomization: Randomization | None = None
    bounder: BounderKind = BounderKind.REPLICATIONS
    seed: int | None = Field(default=None, description=f"Falls back to ${SEED_ENV}, then {DEFAULT_SEED}")
    alpha: float = 0.05
    eps_abs: float = 0.01
    eps_rel: float = 0.0
    metric: MetricKind = MetricKind.ABS_OR_REL
    m1: int = 10
    max_samples: int = 2**20
    replications: int = DEFAULT_REPLICATIONS
    inflation: float = DEFAULT_INFLATION
    workers: int | None = Field(default=None, description="Evaluation threads (None for auto-detection)")
    output_format: OutputFormat = OutputFormat.JSON
    output: str | None = None
    dimension: int = 3
    subsets: str | None = Field(default=None, description="'all', 'singletons' or e.g. '1;2;1,3'")
    ishigami_a: float = 7.0
    ishigami_b: float = 0.1
    observations: list[float] = Field(default_factory=lambda: [1.0, 1.0])
    y_star: float | None = None
    study_seeds: int = 20
    study_m_min: int = 8
    study_m_max: int = 14
    debug: bool = False

    @field_validator("alpha")
    @classmethod
    def validate_alpha(cls, v: float) -> float:
        if not 0 < v < 1:
            raise ValueError("alpha must lie in (0, 1)")
        return v

    @field_validator("eps_abs")
    @classmethod
    def validate_eps_abs(cls, v: float) -> float:
        if v < 0:
            raise ValueError("eps_abs must be non-negative")
        return v

    @field_validator("eps_rel")
    @classmethod
    def validate_eps_rel(cls, v: float) -> float:
        if not 0 <= v < 1:
            raise ValueError("eps_rel must lie in [0, 1) for the error metric to be a metric map")
        return v

    @field_validator("metric")
    @classmethod
    def validate_metric(cls, v: MetricKind) -> MetricKind:
        if v is MetricKind.CUSTOM:
            raise ValueError("custom metrics need a Python function and are available from the library only")
        return v

    @field_validator("inflation")
    @classmethod
    def validate_inflation(cls, v: float) -> float:
        if v < 1:
            raise ValueError("inflation must be at least 1")
        return v

    @field_validator("replications")
    @classmethod
    def validate_replications(cls, v: int) -> int:
        if v < 2:
            raise ValueError("at least 2 replications are required")
        return v

    @field_validator("m1", "dimension", "study_seeds")
    @classmethod
    def validate_positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be at least 1")
        return v

    @field_validator("workers")
    @classmethod
    def validate_workers(cls, v: int | None) -> int | None:
        if v is not None and v < 1:
            raise ValueError("workers must be at least 1")
        return v

    @field_validator("subsets", mode="before")
    @classmethod
    def validate_subsets(cls, v):
        if isinstance(v, list):
            v = ";".join(",".join(str(k) for k in u) if isinstance(u, list | tuple) else str(u) for u in v)
        if v is None or v in ("all", "singletons"):
            return v
        for part in _split(str(v), ";"):
            if not all(item.isdigit() for item in _split(part, ",")):
                raise ValueError(f"subset '{part}' must list 1-based input indices separated by ','")
        return str(v)

    @field_validator("observations", mode="before")
    @classmethod
    def validate_observations(cls, v):
        if isinstance(v, str):
            return [float(item) for item in _split(v, ",")]
        return v

    @model_validator(mode="after")
    def validate_combination(self) -> "RunConfig":
        if self.eps_abs == 0 and self.eps_rel == 0:
            raise ValueError("at least one of eps_abs and eps_rel must be positive")
        if 2**self.m1 > self.max_samples:
            raise ValueError(f"initial sample size 2^{self.m1} exceeds max_samples {self.max_samples}")
        if not 1 <= self.study_m_min <= self.study_m_max:
            raise ValueError("study_m_min must be at least 1 and not exceed study_m_max")
        if self.preset is not None and self.preset not in PRESETS[self.command]:
            expected = ", ".join(PRESETS[self.command])
            raise ValueError(f"preset '{self.preset}' is not valid for {self.command}, expected one of: {expected}")
        if self.command is not Command.CONVERGENCE:
            low_discrepancy = self.sequence.is_low_discrepancy
            if self.bounder is BounderKind.REPLICATIONS and not low_discrepancy:
                raise ValueError("the replications bounder needs a low-discrepancy sequence (lattice or net)")
            if self.bounder is BounderKind.CLT and low_discrepancy:
                raise ValueError("the clt-iid bounder needs IID points; use replications with lattice or net")
            if self.bounder is BounderKind.REPLICATIONS and self.randomization is Randomization.NONE:
                raise ValueError("the replications bounder needs randomized copies, not randomization 'none'")
        if self.sequence is SequenceKind.LATTICE and self.randomization is Randomization.SCRAMBLE:
            raise ValueError("lattices are randomized by shift only")
        return self

    def __init__(self, /, **data):
        try:
            super().__init__(**data)
        except ValidationError as e:
            error_messages = [f"{err['loc'][0] if err['loc'] else 'config'}: {err['msg']}" for err in e.errors()]
            raise UsageError(f"Validation Error: {', '.join(error_messages)}")
        if self.debug:
            logging.debug("Running in Debug mode")
        self._resolve_seed()
        self._resolve_workers()

    def _resolve_seed(self):
        if self.seed is not None:
            return
        env_seed = os.environ.get(SEED_ENV)
        if env_seed is None:
            self.seed = DEFAULT_SEED
            return
        try:
            self.seed = int(env_seed)
        except ValueError:
            raise UsageError(f"Validation Error: {SEED_ENV}: '{env_seed}' is not an integer")
        logging.info(f"Using seed {self.seed} from ${SEED_ENV}")

    def _resolve_workers(self):
        if self.workers is None:
            self.workers = detect_worker_count()

    @property
    def active_preset(self) -> str:
        return self.preset if self.preset is not None else PRESETS[self.command][0]

    def resolve_subsets(self, nu: int) -> list[tuple[int, ...]] | None:
        """Subsets to analyse; ``None`` leaves the choice to the preset."""
        if self.subsets is None:
            return None
        if self.subsets == "all":
            return all_subsets(nu)
        if self.subsets == "singletons":
            return singletons(nu)
        return [tuple(int(k) for k in _split(part, ",")) for part in _split(self.subsets, ";")]
