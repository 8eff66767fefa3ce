"""Finite battery with energy accounting"""
from dataclasses import dataclass


@dataclass
class BatteryState:
    """Continuous stored energy (nJ) plus running totals for conservation checks"""
    energy: float
    capacity: float
    harvested: float = 0.0
    consumed: float = 0.0
    spilled: float = 0.0

    def __post_init__(self):
        if self.capacity <= 0:
            raise ValueError(f"capacity must be > 0, got {self.capacity}")
        self.energy = min(max(self.energy, 0.0), self.capacity)

    def charge(self, energy_nj: float) -> None:
        """Add harvested energy; anything above capacity is spilled"""
        self.harvested += energy_nj
        total = self.energy + energy_nj
        if total > self.capacity:
            self.spilled += total - self.capacity
            total = self.capacity
        self.energy = total

    def draw(self, energy_nj: float) -> None:
        if energy_nj > self.energy + 1e-9:
            raise ValueError(f"cannot draw {energy_nj:.3f} nJ from {self.energy:.3f} nJ")
        self.consumed += energy_nj
        self.energy = max(0.0, self.energy - energy_nj)

    def run(self, harvested_nj: float, demand_nj: float) -> None:
        """Execute with concurrent harvesting: clamp(E + H - D) at capacity"""
        self.harvested += harvested_nj
        self.consumed += demand_nj
        total = self.energy + harvested_nj - demand_nj
        if total > self.capacity:
            self.spilled += total - self.capacity
            total = self.capacity
        self.energy = max(0.0, total)
