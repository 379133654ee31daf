import numpy as np
import pytest

from twopoint.distributions import UniformArrival, build_empirical_arrival
from twopoint.estimation import fit_mle
from twopoint.geometry import SurveyWindows
from twopoint.model import JourneyModel, uniform_model
from twopoint.simulation import simulate_survey, study_case

# Case 1 observable mass at rate 0.5 (closed form below); Case 2 from scipy dblquad, frozen
CASE1_C = 0.6148493092075639
CASE2_C = 0.5806926557610745


def case1_closed_form(rate):
    """C(rate) for Case 1 windows: split at x = 7 and integrate each piece exactly."""
    r = rate
    return ((1 - np.exp(-r)) / r + 2.0 - (np.exp(-r) - np.exp(-4 * r)) / r) / 3.0


def random_model(rng, family=None):
    """Random windows, arrival density and parameter vector; ``family`` forces the journey law."""
    while True:
        xs = rng.uniform(0, 10)
        xe = xs + rng.uniform(1, 4)
        ys = xs + rng.uniform(-1, 3)
        ye = ys + rng.uniform(1, 5)
        tff = 0.0 if rng.random() < 0.5 else rng.uniform(0, 0.5)
        tmax = tff + rng.uniform(2, 8)
        try:
            w = SurveyWindows(xs, xe, ys, ye, tff, tmax)
        except ValueError:
            continue
        break
    if rng.random() < 0.5:
        arrival = UniformArrival(xs, xe)
    else:
        arrival = build_empirical_arrival(rng.beta(2, 3, 400) * (xe - xs) + xs, (xs, xe), bin_width=0.5)
    family = family or ("exp" if rng.random() < 0.5 else "weibull")
    if family == "exp":
        return JourneyModel("exp", arrival, w), np.array([rng.uniform(0.2, 2.0)])
    return JourneyModel("weibull", arrival, w), np.array([rng.uniform(0.6, 3.0), rng.uniform(0.5, 3.0)])


@pytest.fixture
def case1_windows():
    return SurveyWindows(6.0, 9.0, 7.0, 10.0, 0.0, 6.0)


@pytest.fixture(scope="session")
def case1_survey():
    return simulate_survey(study_case(1, seed=42))


@pytest.fixture(scope="session")
def case1_fit(case1_survey):
    d = case1_survey.survivors
    return fit_mle(d, uniform_model("exp", d.windows))


@pytest.fixture(scope="session")
def case2_fit():
    d = simulate_survey(study_case(2, seed=42)).survivors
    return fit_mle(d, uniform_model("weibull", d.windows))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# acceptance verdicts, printed once at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line[1])
