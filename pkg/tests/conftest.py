import numpy as np
import pytest

from isslab.orlicz import YoungFunction, complementary


@pytest.fixture(scope="session")
def comp_loglog() -> YoungFunction:
    """Tabulated complementary function of s*ln(ln(s+e)); shared because
    its construction runs a few hundred Legendre transforms."""
    return complementary(YoungFunction.loglog())


@pytest.fixture(scope="session")
def adm8() -> dict:
    """Admissibility certificate of the 8-mode benchmark system."""
    from isslab.diagonal import example3_admissibility

    return example3_admissibility(8)


@pytest.fixture(scope="session")
def fp_bench():
    """A mid-resolution Fokker-Planck model with nontrivial potential and
    control shape, shared across the heavier tests."""
    from isslab import fokker_planck as fp

    J = 128
    alpha = fp.clamp_end_slopes(np.sin(np.pi * np.linspace(0.0, 1.0, J + 1)))
    return fp.build_model(0.5, lambda x: np.cos(2 * np.pi * x) / 2, alpha, J)
