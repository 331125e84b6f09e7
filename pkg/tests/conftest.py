"""Shared fixtures: the diabetes datasets and their quadratic expansion."""

import pytest

from stepfdr.dataio import ExpansionSpec, expand, load_diabetes
from stepfdr.regress import estimate_sigma2


@pytest.fixture(scope="session")
def diabetes_main():
    return load_diabetes()


@pytest.fixture(scope="session")
def diabetes_quad(diabetes_main):
    return expand(
        diabetes_main,
        ExpansionSpec(square_excluded=("SEX",), include_interactions=True),
    )


@pytest.fixture(scope="session")
def quad_sigma2(diabetes_quad):
    # One shared residual-variance estimate from the largest model under
    # consideration (the quadratic pool), used for both searches.
    return estimate_sigma2(diabetes_quad)
