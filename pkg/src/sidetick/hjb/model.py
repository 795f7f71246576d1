"""Market and preference constants of the market-making problem."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from ..errors import DomainError


@dataclass(frozen=True)
class ModelParams:
    """Constants of the controlled market.

    ``sigma`` is in price units per square-root second; ``lam`` is the base
    order-arrival rate (per second) before the tick discount
    ``1 / (1 + (kappa * alpha)**2)``.  ``c`` is the fee the exchange earns
    per market order.
    """

    sigma: float = 0.01
    lam: float = 4.0
    kappa: float = 10.0
    phi: float = 0.005
    phi_minus: float = 0.0
    A: float = 0.1
    q_max: int = 5
    T: float = 40.0
    c: float = 1.0

    def __post_init__(self):
        checks = (
            ("sigma", self.sigma > 0),
            ("lam", self.lam >= 0),
            ("kappa", self.kappa > 0),
            ("phi", self.phi >= 0),
            ("phi_minus", self.phi_minus >= 0),
            ("A", self.A >= 0),
            ("q_max", isinstance(self.q_max, int) and self.q_max >= 1),
            ("T", self.T > 0),
            ("c", self.c > 0),
        )
        for name, ok in checks:
            if not ok:
                raise DomainError(f"invalid {name}={getattr(self, name)!r}")

    def replace(self, **changes) -> "ModelParams":
        d = asdict(self)
        d.update(changes)
        return ModelParams(**d)

    def side_rate(self, alpha: float) -> float:
        """Fill rate of a present quote on a side with tick ``alpha``."""
        return self.lam / (1.0 + (self.kappa * alpha) ** 2)

    def as_dict(self) -> dict:
        return asdict(self)


def intensity(ell: int, alpha: float, q: int, side: str, params: ModelParams) -> float:
    """Execution rate of one side given the presence flag and inventory."""
    if abs(q) > params.q_max:
        raise DomainError(f"|q|={abs(q)} exceeds q_max={params.q_max}")
    if side in ("a", "ask"):
        allowed = q > -params.q_max
    elif side in ("b", "bid"):
        allowed = q < params.q_max
    else:
        raise ValueError(f"unknown side {side!r}")
    if not ell or not allowed:
        return 0.0
    return params.side_rate(alpha)


def terminal_value(S: float, q: int, A: float) -> float:
    """Liquidation value of inventory ``q`` marked at ``S`` with a quadratic haircut."""
    return q * (S - A * q)


def running_penalty(q: int, params: ModelParams) -> float:
    """Instantaneous inventory penalty, heavier on short positions."""
    pen = -params.phi * q * q
    if q < 0:
        pen -= params.phi_minus * q * q
    return pen
