"""Licensed under The MIT License (MIT) - Copyright (c) 2023-present the gumbel-phcs authors. See LICENSE"""

from __future__ import annotations

import math
import sys
from collections.abc import Mapping
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from typing_extensions import Final

from .bayes import GammaPriorPair
from .censoring import CensoringPlan, parse_removals
from .enums import LossKind
from .errors import ConfigError, DomainError, InvalidPlan

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = (
    "COMMANDS",
    "RunConfig",
    "load_config_file",
    "resolve_config",
)

COMMANDS: Final = ("fit", "mps", "bayes", "intervals", "gof", "simulate", "censor", "plotdata")


@dataclass(frozen=True)
class RunConfig:
    """The fully resolved settings of one command line run.

    Every field can be set from the config file under the same name, flags take precedence.
    """

    command: str
    input: Path | None = None
    """A data file, exclusive with :attr:`bundled_covid`."""
    bundled_covid: bool = False
    n: int | None = None
    m: int | None = None
    T: float = math.inf
    scheme: int | None = None
    removals: str | None = None
    """Run-length removal text such as ``"0*39,50"``, exclusive with :attr:`scheme`."""
    seed: int = 0
    reps: int | None = None
    loss: LossKind | None = None
    """Restrict Bayes estimates to one loss, all three when ``None``."""
    p: float = 0.25
    q: float = 0.25
    prior: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    chain: int = 5000
    burn_in: int | None = None
    gamma: float = 0.05
    boot: int = 1000
    raw_boot_t: bool = False
    refit: bool = False
    workers: int | None = None
    out: Path = Path("out")
    simulate: Mapping[str, Any] = field(default_factory=dict)
    """The ``[simulate]`` table, see :meth:`~gumbel_phcs.sim.SimulationConfig.from_mapping`."""

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.input is not None:
            object.__setattr__(self, "input", Path(self.input))
        object.__setattr__(self, "out", Path(self.out))
        if isinstance(self.prior, str):
            try:
                prior = tuple(float(value) for value in self.prior.split(","))
            except ValueError:
                raise ConfigError(f"cannot parse prior {self.prior!r}, expected a,b,c,d") from None
            object.__setattr__(self, "prior", prior)
        if len(self.prior) != 4:
            raise ConfigError(f"prior needs four hyper-parameters a,b,c,d, got {self.prior!r}")
        if self.loss is not None:
            try:
                object.__setattr__(self, "loss", LossKind(str(self.loss).upper()))
            except ValueError:
                raise ConfigError(f"unknown loss {self.loss!r}") from None

        if self.command != "simulate" and (self.input is None) == (not self.bundled_covid):
            raise ConfigError("give exactly one of --input or --bundled-covid")
        if self.scheme is not None and self.removals is not None:
            raise ConfigError("give at most one of --scheme or --removals")
        if not 0 < self.gamma < 1:
            raise ConfigError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.chain < 1 or (self.burn_in is not None and not 0 <= self.burn_in < self.chain):
            raise ConfigError(f"need chain >= 1 and 0 <= burn-in < chain, got {self.chain} and {self.burn_in}")
        if self.reps is not None and self.reps < 1:
            raise ConfigError(f"reps must be positive, got {self.reps}")
        try:
            GammaPriorPair(*self.prior)
        except DomainError as exc:
            raise ConfigError(str(exc)) from None

    @property
    def prior_pair(self) -> GammaPriorPair:
        return GammaPriorPair(*self.prior)

    @property
    def resolved_burn_in(self) -> int:
        return self.burn_in if self.burn_in is not None else int(0.2 * self.chain)

    @property
    def censored(self) -> bool:
        return self.scheme is not None or self.removals is not None

    def plan(self, size: int) -> CensoringPlan:
        """The censoring plan for a dataset of ``size`` values.

        ``n`` defaults to ``size`` and, for explicit removals, ``m`` to their count.

        Raises
        ------
        ConfigError
            The plan is incomplete or invalid.
        """
        n = self.n if self.n is not None else size
        try:
            if self.removals is not None:
                removals = parse_removals(self.removals)
                m = self.m if self.m is not None else len(removals)
                return CensoringPlan(n, m, self.T, removals)
            if self.scheme is None:
                raise ConfigError("a plan needs --scheme or --removals")
            if self.m is None:
                raise ConfigError("--scheme needs --m")
            return CensoringPlan.from_scheme(self.scheme, n, self.m, self.T)
        except InvalidPlan as exc:
            raise ConfigError(str(exc)) from exc

    def as_dict(self) -> dict[str, Any]:
        values = asdict(self)
        values["input"] = str(self.input) if self.input is not None else None
        values["out"] = str(self.out)
        values["loss"] = self.loss.value if self.loss is not None else None
        values["simulate"] = dict(self.simulate)
        return values


def load_config_file(path: str | Path) -> dict[str, Any]:
    """Read a TOML config file, keys may use dashes in place of underscores.

    Raises
    ------
    ConfigError
        The file is not valid TOML or holds unknown keys.
    """
    with open(path, "rb") as file:
        try:
            raw = tomllib.load(file)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    values = {key.replace("-", "_"): value for key, value in raw.items()}
    unknown = set(values) - set(RunConfig.__dataclass_fields__) - {"command"}
    if unknown:
        raise ConfigError(f"{path}: unknown keys {', '.join(sorted(unknown))}")
    return values


def resolve_config(command: str, flags: Mapping[str, Any], file_values: Mapping[str, Any] | None = None) -> RunConfig:
    """Merge config file values with flags, flags that were given win.

    Raises
    ------
    ConfigError
        The merged settings are invalid.
    """
    merged = {key: value for key, value in (file_values or {}).items() if key != "command"}
    merged.update({key: value for key, value in flags.items() if value is not None})
    try:
        return RunConfig(command=command, **merged)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
