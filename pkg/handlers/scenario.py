"""
Scenario files: JSON documents describing the network, integration and
simulation settings. Unknown keys are rejected.
"""
import json
import logging
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from config import (
    QMC_BATCHES, QMC_POINTS, QMC_SEED, SIM_FAR_FIELD, SIM_RADIUS, SIM_SEED, SIM_TOP_K, SIM_TRIALS,
)
from errors import DomainError, ScenarioError
from models import (
    FadingKind, FadingSpec, NetworkScenario, PathLossParams, QmcConfig, SimConfig, TierSpec,
)
from services.coverage import db_to_linear

logger = logging.getLogger(__name__)


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class PathLossIn(_Section):
    K: float = 1.0
    beta: float = 4.0


class ChannelIn(_Section):
    W: float = 0.0
    gamma: float = 1.0


class FadingParamsIn(_Section):
    mean: float = 1.0
    sigma_db: float = 0.0


class FadingIn(_Section):
    kind: FadingKind = FadingKind.CONSTANT
    params: FadingParamsIn = Field(default_factory=FadingParamsIn)


class TierIn(_Section):
    lam: float = Field(1.0, alias="lambda")
    power: float = 1.0
    fading: FadingIn = Field(default_factory=FadingIn)
    tau_dB: float = 0.0


class QmcIn(_Section):
    points: int = QMC_POINTS
    seed: int = QMC_SEED


class SimIn(_Section):
    radius: float = SIM_RADIUS
    trials: int = SIM_TRIALS
    seed: int = SIM_SEED
    top_k: int = SIM_TOP_K
    far_field: bool = SIM_FAR_FIELD


class ScenarioFile(_Section):
    path_loss: PathLossIn = Field(default_factory=PathLossIn)
    channel: ChannelIn = Field(default_factory=ChannelIn)
    tiers: list[TierIn] = Field(default_factory=lambda: [TierIn()], min_length=1)
    qmc: QmcIn = Field(default_factory=QmcIn)
    sim: SimIn = Field(default_factory=SimIn)

    # --- Domain objects ---

    def network(self) -> NetworkScenario:
        tiers = tuple(
            TierSpec(
                lam=t.lam,
                tau=db_to_linear(t.tau_dB),
                power=t.power,
                fading=FadingSpec(t.fading.kind, t.fading.params.mean, t.fading.params.sigma_db),
            )
            for t in self.tiers
        )
        return NetworkScenario(
            tiers, PathLossParams(self.path_loss.beta, self.path_loss.K),
            self.channel.W, self.channel.gamma,
        )

    def qmc_config(self, seed: Optional[int] = None) -> QmcConfig:
        return QmcConfig(
            point_count=self.qmc.points,
            scramble_seed=self.qmc.seed if seed is None else seed,
            batch_count=QMC_BATCHES,
        )

    def sim_config(self, seed: Optional[int] = None) -> SimConfig:
        return SimConfig(
            region_radius=self.sim.radius,
            trials=self.sim.trials,
            seed=self.sim.seed if seed is None else seed,
            top_k=self.sim.top_k,
            far_field=self.sim.far_field,
        )


def _key_path(loc: tuple) -> str:
    return ".".join(str(part) for part in loc) or "<root>"


def parse_scenario(text: str, source: str = "<string>") -> ScenarioFile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{source}: line {e.lineno}, column {e.colno}: {e.msg}") from e
    try:
        parsed = ScenarioFile.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        raise ScenarioError(f"{source}: {_key_path(first['loc'])}: {first['msg']}") from e
    try:
        parsed.network()
        parsed.qmc_config()
        parsed.sim_config()
    except DomainError as e:
        raise ScenarioError(f"{source}: {e}") from e
    return parsed


def load_scenario(path) -> ScenarioFile:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioError(f"cannot read scenario {path}: {e.strerror}") from e
    scenario = parse_scenario(text, str(path))
    logger.info(f"Loaded scenario {path} with {len(scenario.tiers)} tier(s)")
    return scenario


def template_text() -> str:
    return json.dumps(ScenarioFile().model_dump(mode="json", by_alias=True), indent=2) + "\n"
