"""
Geometric constants with provenance
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, Optional

from geometry.errors import DomainError
from geometry.metric_graph import Length, as_fraction

logger = logging.getLogger(__name__)

CONFIGURED = "configured"
MEASURED = "measured"
DERIVED = "derived"


@dataclass(frozen=True)
class Constant:
    value: Fraction
    source: str
    instance_id: Optional[str] = None
    operation: Optional[str] = None

    def to_dict(self) -> Dict:
        return {
            "value": self.value,
            "source": self.source,
            "instance_id": self.instance_id,
            "operation": self.operation,
        }


class GeometryParams:
    """
    Named constants used by the ladder and the Cannon-Thurston harness

    Every entry records whether it was configured, measured on an instance
    or derived from other entries. C is always C1 + C2.
    """

    NAMES = (
        "delta", "D", "C1", "C2", "C",
        "P1", "P2", "P3", "P4", "P5", "P6", "P7", "P",
        "B", "K0", "K1", "K2", "C0", "C_ray",
    )

    def __init__(self):
        self._entries: Dict[str, Constant] = {}

    def __contains__(self, name: str) -> bool:
        return name in self._entries

    def __getitem__(self, name: str) -> Fraction:
        return self.entry(name).value

    def __iter__(self) -> Iterator[str]:
        return iter(name for name in self.NAMES if name in self._entries)

    def entry(self, name: str) -> Constant:
        if name not in self._entries:
            raise DomainError(f"Constant {name} has not been configured or measured")
        return self._entries[name]

    def get(self, name: str, default: Optional[Fraction] = None) -> Optional[Fraction]:
        return self._entries[name].value if name in self._entries else default

    def configure(self, name: str, value: Length):
        """Set a constant by hand; configuring C fixes C1 = C and C2 = 0"""
        if name == "C":
            self._put("C1", Constant(self._checked("C1", value), CONFIGURED))
            self._put("C2", Constant(Fraction(0), CONFIGURED))
            self._derive_c()
            return
        self._put(name, Constant(self._checked(name, value), CONFIGURED))
        if name in ("C1", "C2"):
            self._derive_c()

    def record(self, name: str, value: Length, instance_id: str, operation: str, overwrite: bool = False):
        """
        Store a measured constant unless it was configured

        Args:
            name: Constant name
            value: Measured value
            instance_id: Instance the value was measured on
            operation: Operation that produced it
            overwrite: Replace an earlier measurement instead of keeping the larger one
        """
        if name == "C":
            raise DomainError("C is derived from C1 and C2")
        if not instance_id:
            raise DomainError(f"Measured constant {name} needs an instance id")
        current = self._entries.get(name)
        if current is not None and current.source == CONFIGURED:
            logger.debug(f"Keeping configured {name} = {current.value}")
            return
        value = self._checked(name, value)
        if current is not None and current.source == MEASURED and not overwrite:
            value = max(value, current.value)
        self._put(name, Constant(value, MEASURED, instance_id, operation))
        logger.info(f"Measured {name} = {value} on {instance_id} ({operation})")
        if name in ("C1", "C2"):
            self._derive_c()

    def derive(self, name: str, value: Length, operation: str, instance_id: Optional[str] = None):
        if name == "C":
            raise DomainError("C is derived from C1 and C2")
        current = self._entries.get(name)
        if current is not None and current.source == CONFIGURED:
            return
        self._put(name, Constant(self._checked(name, value), DERIVED, instance_id, operation))

    def resolve_D(self, instance_id: Optional[str] = None) -> Fraction:
        """D as configured, otherwise 4*delta + 1"""
        if "D" not in self._entries:
            delta = self["delta"]
            self.derive("D", 4 * delta + 1, "4*delta+1", instance_id or self.entry("delta").instance_id)
        return self["D"]

    def snapshot(self) -> Dict[str, Dict]:
        return {name: self._entries[name].to_dict() for name in self}

    def _derive_c(self):
        if "C1" in self._entries and "C2" in self._entries:
            c1, c2 = self._entries["C1"], self._entries["C2"]
            source = CONFIGURED if c1.source == c2.source == CONFIGURED else DERIVED
            self._entries["C"] = Constant(c1.value + c2.value, source, c1.instance_id or c2.instance_id, "C1+C2")

    def _put(self, name: str, constant: Constant):
        self._entries[name] = constant

    def _checked(self, name: str, value: Length) -> Fraction:
        if name not in self.NAMES:
            raise DomainError(f"Unknown constant: {name}")
        value = as_fraction(value)
        if value < 0:
            raise DomainError(f"Constant {name} must be non-negative, got {value}")
        return value
