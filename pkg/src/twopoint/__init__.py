"""Survivorship-bias-corrected journey-time fitting for two-point re-identification surveys."""

__version__ = "0.1.0"

from .geometry import SurveyWindows, TimeTimePoint, Zone, bounds_at, classify  # noqa: E402
from .distributions import Exponential, Weibull, UniformArrival, EmpiricalArrival, build_empirical_arrival  # noqa: E402
from .data import Dataset, ReidRecord  # noqa: E402
from .model import JourneyModel, normalization, log_pdf, marginal_journey_cdf, unobserved_mass  # noqa: E402
from .estimation import FitResult, fit_mle, fisher_ci, observed_information, score, total_log_likelihood  # noqa: E402
from .bootstrap import BootstrapSpec, bootstrap_ci  # noqa: E402
from .evaluation import ks_test, replicate_dataset  # noqa: E402
from .simulation import SimConfig, simulate_survey, coverage_study  # noqa: E402

__all__ = [
    "SurveyWindows", "TimeTimePoint", "Zone", "bounds_at", "classify",
    "Exponential", "Weibull", "UniformArrival", "EmpiricalArrival", "build_empirical_arrival",
    "Dataset", "ReidRecord",
    "JourneyModel", "normalization", "log_pdf", "marginal_journey_cdf", "unobserved_mass",
    "FitResult", "fit_mle", "fisher_ci", "observed_information", "score", "total_log_likelihood",
    "BootstrapSpec", "bootstrap_ci",
    "ks_test", "replicate_dataset",
    "SimConfig", "simulate_survey", "coverage_study",
]
