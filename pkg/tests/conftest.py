from fractions import Fraction

import hypothesis.strategies as st
from hypothesis import HealthCheck, settings

settings.register_profile(
    "atomlab",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
    max_examples=60,
)
settings.load_profile("atomlab")


small_ints = st.integers(min_value=-9, max_value=9)


@st.composite
def fractions(draw, bound=9):
    num = draw(st.integers(min_value=-bound, max_value=bound))
    den = draw(st.integers(min_value=1, max_value=bound))
    return Fraction(num, den)


@st.composite
def rational_matrices(draw, n=None, max_n=5, bound=6):
    n = draw(st.integers(min_value=1, max_value=max_n)) if n is None else n
    return [[draw(fractions(bound)) for _ in range(n)] for _ in range(n)]


@st.composite
def degree_raising(draw, max_dim=12, density=0.6):
    """(degrees, top degree D, kappa) with kappa mapping H^i into H^(>= i+2)."""
    D = draw(st.integers(min_value=1, max_value=4))
    n = draw(st.integers(min_value=1, max_value=max_dim))
    degs = sorted(draw(st.lists(st.integers(0, 2 * D), min_size=n, max_size=n)))
    kappa = [[Fraction(0)] * n for _ in range(n)]
    for t in range(n):
        for s in range(n):
            if degs[t] - degs[s] >= 2 and draw(st.floats(0, 1)) < density:
                kappa[t][s] = draw(fractions(7))
    return degs, D, kappa


@st.composite
def diamonds(draw, max_d=4, bound=30):
    """Random valid Hodge diamonds, built from orbit representatives."""
    from atomlab.atoms import HodgeDiamond

    d = draw(st.integers(min_value=0, max_value=max_d))
    h = {}
    for p in range(d + 1):
        for q in range(d + 1):
            orbit = {(p, q), (q, p), (d - p, d - q), (d - q, d - p)}
            rep = min(orbit)
            if rep not in h:
                lo = 1 if rep == (0, 0) else 0
                v = draw(st.integers(min_value=lo, max_value=bound))
                for pq in orbit:
                    h[pq] = v
    return HodgeDiamond(d, h)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
