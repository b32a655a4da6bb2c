"""
End-to-end experiments: load or generate an instance, resolve constants,
build the reference ladder, measure the profile and run the invariant suites
"""
import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from config import DEFAULT_BUDGET, DEFAULT_JOBS, DEFAULT_OUTPUT_DIR, DEFAULT_SEED
from geometry.errors import DomainError
from geometry.params import GeometryParams
from harness.ct_harness import CTHarness, CTProfile
from harness.generators import InstanceGenerator
from harness.suites import SUITES, InvariantSuites, SuiteContext, SuiteResult, family_sweep
from reports.report_store import ReportStore
from trees.ladder import LadderBuilder
from trees.tree_spaces import TreeBuilder, TreeGeometry, TreeOfSpaces
from utils.file_handler import FileHandler

logger = logging.getLogger(__name__)


def parse_radii(text: str) -> List[Fraction]:
    """
    "1..4" gives 1, 2, 3, 4; "0,1/2,3" gives exactly those radii
    """
    text = text.strip()
    if ".." in text:
        low, high = (part.strip() for part in text.split("..", 1))
        try:
            a, b = int(low), int(high)
        except ValueError:
            raise DomainError(f"Radius range bounds must be integers: {text!r}") from None
        radii = [Fraction(k) for k in range(a, b + 1)]
    else:
        try:
            radii = [Fraction(part.strip()) for part in text.split(",") if part.strip()]
        except (ValueError, ZeroDivisionError):
            raise DomainError(f"Bad radius list {text!r}") from None
    if not radii:
        raise DomainError(f"Empty radius range {text!r}")
    if any(r < 0 for r in radii):
        raise DomainError(f"Radii must be non-negative: {text!r}")
    return sorted(set(radii))


class ExperimentConfig(BaseModel):
    """One experiment: an instance, constant overrides, the radii and where to write"""
    model_config = ConfigDict(extra="forbid")

    generator: Optional[str] = None
    input: Optional[str] = None
    p: Optional[int] = Field(default=None, ge=0)
    N: str = "1..4"
    budget: int = Field(default=DEFAULT_BUDGET, ge=1)
    seed: int = DEFAULT_SEED
    output_dir: str = DEFAULT_OUTPUT_DIR
    D: Optional[str] = None
    C: Optional[str] = None
    depth: Optional[int] = Field(default=None, ge=1)
    jobs: int = Field(default=DEFAULT_JOBS, ge=1)
    suites: List[str] = Field(default_factory=lambda: list(SUITES))
    family: List[str] = Field(default_factory=list)

    @field_validator("N")
    @classmethod
    def _radii(cls, value: str) -> str:
        parse_radii(value)
        return value

    @field_validator("D", "C")
    @classmethod
    def _override(cls, value: Optional[str]) -> Optional[str]:
        if value is None:
            return value
        try:
            number = Fraction(value)
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"not a rational number: {value!r}") from None
        if number < 0:
            raise ValueError(f"overrides must be non-negative, got {value}")
        return value

    @field_validator("suites")
    @classmethod
    def _suites(cls, value: List[str]) -> List[str]:
        unknown = sorted(set(value) - set(SUITES))
        if unknown:
            raise ValueError(f"unknown suites {unknown}; known: {list(SUITES)}")
        return value

    @model_validator(mode="after")
    def _one_instance(self) -> "ExperimentConfig":
        if (self.generator is None) == (self.input is None):
            raise ValueError("give exactly one of a generator spec or an input file")
        return self

    @property
    def radii(self) -> List[Fraction]:
        return parse_radii(self.N)


@dataclass
class ReportDocument:
    instance_id: str
    config: Dict
    params: GeometryParams
    profile: Optional[CTProfile]
    suites: List[SuiteResult]
    ladder: Optional[Dict] = None
    family: Optional[Dict] = None
    diagnostics: List[str] = field(default_factory=list)
    timings: Dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(suite.passed for suite in self.suites)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def constants(self) -> List[Dict]:
        """Every constant with its provenance"""
        return [{"name": name, **self.params.entry(name).to_dict()} for name in self.params]

    def to_dict(self) -> Dict:
        return {
            "instance_id": self.instance_id,
            "config": self.config,
            "params": self.params.snapshot(),
            "constants": self.constants(),
            "profile": self.profile.to_dict() if self.profile else None,
            "suites": [suite.to_dict() for suite in self.suites],
            "passed": self.passed,
            "ladder": self.ladder,
            "family": self.family,
            "diagnostics": self.diagnostics,
        }


class ExperimentRunner:
    """Run one experiment and write its files"""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.timings: Dict[str, float] = {}

    @contextmanager
    def _stage(self, name: str):
        start = time.perf_counter()
        logger.debug(f"Stage {name}")
        yield
        self.timings[name] = round(time.perf_counter() - start, 3)

    def load_instance(self) -> TreeOfSpaces:
        config = self.config
        if config.generator is not None:
            return InstanceGenerator.generate(config.generator, config.seed)
        return FileHandler.parse_tree(FileHandler.read_json(config.input), config.input)

    def configured_params(self) -> GeometryParams:
        params = GeometryParams()
        if self.config.D is not None:
            params.configure("D", Fraction(self.config.D))
        if self.config.C is not None:
            params.configure("C", Fraction(self.config.C))
        return params

    def run(self, write: bool = True) -> ReportDocument:
        """
        Execute the experiment

        Args:
            write: Write profile.csv, report.json and timings.json to the output directory

        Returns:
            ReportDocument; its exit_code is 0 exactly when every selected suite passed
        """
        config = self.config
        with self._stage("instance"):
            tos = self.load_instance()
            validation = TreeBuilder.validate(tos, seed=config.seed)
            validation.raise_for_failures()
            geo = TreeGeometry(tos, config.depth)
        p = config.p if config.p is not None else CTHarness.default_reference_point(geo)
        with self._stage("params"):
            params = CTHarness.resolve_params(geo, self.configured_params(), p, config.seed)
        ladder = None
        with self._stage("ladder"):
            lam = CTHarness.reference_geodesic(geo, p)
            if lam is not None:
                ladder = LadderBuilder.build_ladder(geo, lam, params["D"], params["C"])
                CTHarness.record_ladder_constants(geo, ladder, params)
        with self._stage("profile"):
            profile = CTHarness.ct_profile(geo, p, config.radii, config.budget, params, config.seed)
        diagnostics = [row.diagnostic for row in profile.rows if row.diagnostic]
        if all(row.M is None for row in profile.rows):
            diagnostics.append(f"no tested radius in {config.N} admits a geodesic")
            logger.warning(diagnostics[-1])
        with self._stage("suites"):
            suites = InvariantSuites.run(SuiteContext(geo, params, p, ladder, profile, config.seed), config.suites)
        family = None
        if config.family:
            with self._stage("family"):
                family = family_sweep(config.family, config.seed, config.jobs)
        document = ReportDocument(tos.instance_id, config.model_dump(exclude={"output_dir", "jobs"}), params, profile, suites,
                                  ladder.to_dict() if ladder else None, family, diagnostics, dict(self.timings))
        if write:
            store = ReportStore(config.output_dir)
            store.write_profile(profile)
            store.write_report(document)
            store.write_timings(self.timings)
        logger.info(f"Experiment on {tos.instance_id}: {'pass' if document.passed else 'FAIL'}")
        return document
