"""Registry of closed-form perturbation functions u with analytic derivatives.

Each entry supplies ``u``, its gradient as the complex number ``u_x + i u_y``
and its Laplacian, which the Beltrami change of variables consumes directly.

Names accepted by :func:`make_potential`::

    const(c)                    u = c
    re(z) | re(shift)           u = shift + Re z      (shift defaults to 0)
    abs2                        u = |z|^2
    gaussian(sigma[, cx, cy])   u = exp(-|z - c|^2 / (2 sigma^2))
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class Potential:
    name: str
    params: dict = field(default_factory=dict)
    value: Callable = None
    grad: Callable = None
    lap: Callable = None

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return np.broadcast_to(self.value(z), z.shape).astype(float)

    def gradient(self, z):
        z = np.asarray(z, dtype=complex)
        return np.broadcast_to(self.grad(z), z.shape).astype(complex)

    def laplacian(self, z):
        z = np.asarray(z, dtype=complex)
        return np.broadcast_to(self.lap(z), z.shape).astype(float)

    def spec(self):
        args = ", ".join(repr(v) for v in self.params.values())
        return f"{self.name}({args})" if self.params else self.name


def const(c=1.0):
    c = float(c)
    return Potential("const", {"c": c}, lambda z: np.full(z.shape, c),
                     lambda z: np.zeros(z.shape, complex), lambda z: np.zeros(z.shape))


def re_z(shift=0.0):
    shift = float(shift)
    return Potential("re", {"shift": shift}, lambda z: shift + z.real,
                     lambda z: np.ones(z.shape, complex), lambda z: np.zeros(z.shape))


def abs2():
    return Potential("abs2", {}, lambda z: np.abs(z) ** 2, lambda z: 2.0 * z,
                     lambda z: np.full(z.shape, 4.0))


def gaussian(sigma=0.5, cx=0.0, cy=0.0):
    sigma = float(sigma)
    c = complex(cx, cy)

    def val(z):
        return np.exp(-np.abs(z - c) ** 2 / (2 * sigma ** 2))

    def grad(z):
        return -(z - c) / sigma ** 2 * val(z)

    def lap(z):
        r2 = np.abs(z - c) ** 2
        return (r2 / sigma ** 4 - 2.0 / sigma ** 2) * val(z)

    return Potential("gaussian", {"sigma": sigma, "cx": float(cx), "cy": float(cy)}, val, grad, lap)


REGISTRY = {"const": const, "re": re_z, "abs2": abs2, "gaussian": gaussian}

_CALL = re.compile(r"^\s*([a-z0-9_]+)\s*(?:\((.*)\))?\s*$")


def make_potential(spec) -> Potential:
    """Build a potential from ``"name(args)"``, ``{"name": ..., "args": [...]}`` or a Potential."""
    if isinstance(spec, Potential):
        return spec
    if isinstance(spec, dict):
        name = spec.get("name")
        args = spec.get("args", [])
        kwargs = {k: v for k, v in spec.items() if k not in ("name", "args")}
    elif isinstance(spec, str):
        m = _CALL.match(spec)
        if not m:
            raise InputError(f"cannot parse potential {spec!r}")
        name, body = m.group(1), m.group(2)
        args, kwargs = [], {}
        if body and body.strip() and not (name == "re" and body.strip() == "z"):
            for part in body.split(","):
                part = part.strip()
                try:
                    args.append(float(part))
                except ValueError:
                    raise InputError(f"bad argument {part!r} in potential {spec!r}") from None
    else:
        raise InputError(f"cannot interpret potential {spec!r}")
    if name not in REGISTRY:
        raise InputError(f"unknown potential {name!r}; known: {sorted(REGISTRY)}")
    try:
        return REGISTRY[name](*args, **kwargs)
    except TypeError as exc:
        raise InputError(f"bad arguments for potential {name!r}: {exc}") from None


def as_callable(u):
    """Accept a Potential, a registry spec, a number or a plain callable."""
    if isinstance(u, (int, float)):
        return const(u)
    if isinstance(u, (str, dict)):
        return make_potential(u)
    return u


def beltrami_potential(u: Potential, eps, z):
    """``V = Laplacian(sqrt(lam)) / sqrt(lam)`` for ``lam = 1 + eps u``, from analytic derivatives."""
    lam = 1.0 + eps * u(z)
    return eps * u.laplacian(z) / (2.0 * lam) - eps ** 2 * np.abs(u.gradient(z)) ** 2 / (4.0 * lam ** 2)
