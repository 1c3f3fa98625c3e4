"""Forward-mode dual numbers carrying a full gradient vector."""

import math

import numpy as np

from .errors import DomainError


class Dual:
    __slots__ = ("val", "grad")

    def __init__(self, val, grad):
        self.val = float(val)
        self.grad = np.asarray(grad, dtype=float)

    @classmethod
    def variable(cls, val, index, n):
        g = np.zeros(n)
        g[index] = 1.0
        return cls(val, g)

    def __repr__(self):
        return f"Dual({self.val!r}, {self.grad!r})"

    def _lift(self, other):
        if isinstance(other, Dual):
            return other
        return Dual(other, np.zeros_like(self.grad))

    def __add__(self, other):
        other = self._lift(other)
        return Dual(self.val + other.val, self.grad + other.grad)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._lift(other)
        return Dual(self.val - other.val, self.grad - other.grad)

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        other = self._lift(other)
        return Dual(self.val * other.val, self.val * other.grad + other.val * self.grad)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._lift(other)
        if other.val == 0.0:
            raise DomainError("division by zero")
        q = self.val / other.val
        return Dual(q, (self.grad - q * other.grad) / other.val)

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def __neg__(self):
        return Dual(-self.val, -self.grad)

    def __pow__(self, other):
        if isinstance(other, Dual):
            if self.val <= 0.0:
                raise DomainError("power with variable exponent needs a positive base")
            return dual_exp(other * dual_ln(self))
        c = float(other)
        if self.val == 0.0 and c < 1.0:
            raise DomainError("derivative of 0^c undefined for c < 1")
        if self.val < 0.0 and not c.is_integer():
            raise DomainError("negative base with non-integer exponent")
        v = self.val ** c
        return Dual(v, c * self.val ** (c - 1.0) * self.grad)

    def __rpow__(self, other):
        base = float(other)
        if base <= 0.0:
            raise DomainError("power with variable exponent needs a positive base")
        v = base ** self.val
        return Dual(v, v * math.log(base) * self.grad)


def dual_sqrt(x):
    if x.val < 0.0:
        raise DomainError("sqrt of negative value")
    if x.val == 0.0:
        raise DomainError("sqrt derivative undefined at 0")
    r = math.sqrt(x.val)
    return Dual(r, x.grad / (2.0 * r))


def dual_exp(x):
    e = math.exp(x.val)
    return Dual(e, e * x.grad)


def dual_ln(x):
    if x.val <= 0.0:
        raise DomainError("ln of non-positive value")
    return Dual(math.log(x.val), x.grad / x.val)


def dual_sin(x):
    return Dual(math.sin(x.val), math.cos(x.val) * x.grad)


def dual_cos(x):
    return Dual(math.cos(x.val), -math.sin(x.val) * x.grad)
