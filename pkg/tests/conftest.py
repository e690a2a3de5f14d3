import numpy as np
import pytest

from tubeap import ExpSum, make_cone


@pytest.fixture(scope="session")
def quadrant():
    return make_cone([[1.0, 0.0], [0.0, 1.0]])


@pytest.fixture(scope="session")
def half_line():
    return make_cone([[1.0]])


@pytest.fixture(scope="session")
def f_two_term_1d():
    """1 + e^{iz}: the closed-form workhorse (J, zeros, winding all known)."""
    return ExpSum([[0.0], [1.0]], [1.0, 1.0])


@pytest.fixture(scope="session")
def f_case1():
    return ExpSum([[0, 0], [1, 0], [0, 1]], [2.0, 1.0, 1.0])


@pytest.fixture(scope="session")
def f_case2():
    return ExpSum([[-1, -1], [0, 0]], [1.0, 1.0])


@pytest.fixture(scope="session")
def f_case3():
    freqs = [[-1 + 1 / k, -1 + 1 / k] for k in range(1, 6)]
    coefs = [10.0 ** (-2 * (k - 1)) for k in range(1, 6)]
    return ExpSum(freqs, coefs, limit_frequencies=[[-1.0, -1.0]])


@pytest.fixture(scope="session")
def f_case4():
    return ExpSum([[0, 0], [-1, 1]], [2.0, 1.0])


@pytest.fixture(scope="session")
def f_case5():
    return ExpSum([[-1, 0], [0, -1]], [1.0, 1.0])


@pytest.fixture(scope="session")
def f_four_term():
    return ExpSum(
        [[0, 0], [1, 0], [1, 1], [2, 0.3]], [1.0, 1.0, 1.0, 1.0]
    )


@pytest.fixture(scope="session")
def f_kink():
    """Two-frequency sum whose active frequency switches on the diagonal."""
    return ExpSum([[-1, 0], [0, -1]], [1.0, 1.0])


@pytest.fixture(scope="session")
def f_corollary():
    return ExpSum([[0, 0], [-1, 0], [0, -1]], [1.0, 1.0, 1.0])


def random_expsum(rng, p=1, n_terms=None, min_sep=0.5, coef_lo=0.5, coef_hi=2.0):
    """Seeded random sum with separated frequencies."""
    if n_terms is None:
        n_terms = int(rng.integers(2, 5))
    while True:
        freqs = rng.uniform(-3.0, 3.0, size=(n_terms, p))
        ok = True
        for i in range(n_terms):
            for j in range(i + 1, n_terms):
                if np.linalg.norm(freqs[i] - freqs[j]) < min_sep:
                    ok = False
        if ok:
            break
    mods = rng.uniform(coef_lo, coef_hi, size=n_terms)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=n_terms)
    return ExpSum(freqs, mods * np.exp(1j * phases))
