from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class FitConfig:
    """Knobs shared by the scalar and operator pipelines."""

    pair_budget: int = 4000
    safety: float = 2.0
    rank_tol: float = 1e-10
    reg: float = 1e-10
    r0: int = 16
    r_max: int = 4096
    identity_terms: bool = True
    sequential: bool = True

    def to_dict(self):
        return asdict(self)
