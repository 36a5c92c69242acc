"""Random test domains and curves shared by the test modules."""

from __future__ import annotations

import numpy as np

from exq.geometry import Contour, Domain


def random_contour(rng: np.random.Generator, radius: float, center: complex = 0j, amp: float = 0.04, modes=(-3, -2, 2, 3)) -> Contour:
    terms = {0: complex(center), 1: radius}
    for j in modes:
        terms[j] = amp * radius * (rng.normal() + 1j * rng.normal()) / np.sqrt(2) / len(modes)
    return Contour.from_terms(terms)


def random_domain(rng: np.random.Generator, holes: int | None = None) -> Domain:
    """Validated random domain with 0 or 1 hole (perturbed disk or annulus)."""
    if holes is None:
        holes = int(rng.integers(0, 2))
    R1 = rng.uniform(1.5, 3.0)
    outer = random_contour(rng, R1, amp=rng.uniform(0.0, 0.08))
    inners = ()
    if holes:
        R2 = rng.uniform(0.3, 0.9)
        c = 0.2 * (rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1))
        inners = (random_contour(rng, R2, c, amp=rng.uniform(0.0, 0.08)),)
    dom = Domain(outer, inners)
    dom.validate()
    return dom
