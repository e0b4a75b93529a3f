"""Shared test fixtures that are plain code, not pytest fixtures."""

from paamm.curves import InvariantCurve


class PowerCurve(InvariantCurve):
    """Same math as the geometric-mean curve but exposing only the required
    interface, so the generic bisection fallbacks get exercised."""

    def __init__(self, theta):
        self.theta = theta

    def invariant(self, r):
        if not (r.x > 0 and r.y > 0):
            raise ValueError("positive reserves required")
        return r.x ** self.theta * r.y ** (1.0 - self.theta)

    def gradient(self, r):
        phi = self.invariant(r)
        return self.theta * phi / r.x, (1.0 - self.theta) * phi / r.y
