"""Planner configuration: penalty weights, dynamic limits, and solver settings."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class SolverConfig:
    max_iterations: int = 500
    gradient_tolerance: float = 1e-4
    objective_tolerance: float = 1e-6
    memory: int = 8
    # Each anchor round runs a short preconditioned solve so collisions are
    # re-detected (and anchors regrown) often, instead of converging deeply
    # against a stale anchor set.
    round_iterations: int = 30
    max_anchor_rounds: int = 80
    # Penalty-method escalation: the collision weight is multiplied by
    # ``escalation`` after ``stall_rounds`` consecutive rounds ending with
    # collisions, and by ``clearance_escalation`` when the curve is
    # collision-free but anchored points sit closer than
    # ``s_f - clearance_slack`` to their surface planes.  ``max_weight``
    # caps the collision weight.
    escalation: float = 2.0
    clearance_escalation: float = 3.0
    stall_rounds: int = 3
    max_weight: float = 1e9
    clearance_slack: float = 5e-4


@dataclass(frozen=True)
class PlannerConfig:
    """Weights, clearance, and per-axis dynamic limits driving the optimizer.

    ``lambda_e`` is the elastic ratio: derivative components inside
    ``lambda_e * limit`` carry no feasibility penalty.  ``c_j_factor``
    places the quadratic tail seam at ``c_j_factor * lambda_e * limit``.
    """

    lambda_s: float = 1.0
    lambda_c: float = 10.0
    lambda_d: float = 1.0
    lambda_f: float = 5.0
    s_f: float = 0.3
    v_m: float = 2.0
    a_m: float = 3.0
    j_m: float = 10.0
    lambda_e: float = 0.95
    c_j_factor: float = 1.2
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        for name in ("lambda_s", "lambda_c", "lambda_d", "lambda_f"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.s_f <= 0:
            raise ValueError("s_f must be positive")
        for name in ("v_m", "a_m", "j_m"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.lambda_e < 1:
            raise ValueError("lambda_e must lie in (0, 1)")
        if self.c_j_factor < 1:
            raise ValueError("c_j_factor must be >= 1")

    def limit(self, order: int) -> float:
        """Dynamic limit for derivative order 1 (velocity) .. 3 (jerk)."""
        return (self.v_m, self.a_m, self.j_m)[order - 1]
