"""Statistical characterisation of series and datasets."""

from .adf import ADFResult, adf_pvalue, adf_test, mackinnon_pvalue, stationarity
from .characteristics import (
    acf,
    first_zero_acf,
    seasonality_strength,
    shifting_value,
    transition_value,
    trend_strength,
)
from .features import FEATURE_NAMES, N_FEATURES, TRANSITION_INDEX, feature_vector
from .profile import (
    FLAG_NAMES,
    CharacteristicProfile,
    ProfileRecord,
    Thresholds,
    channel_features,
    characterize_dataset,
    characterize_series,
    classify_characteristics,
    correlation_score,
    pfa_select,
    profile_records,
)
from .stl import Decomposition, stl_decompose

__all__ = [
    "ADFResult",
    "CharacteristicProfile",
    "Decomposition",
    "FEATURE_NAMES",
    "FLAG_NAMES",
    "N_FEATURES",
    "ProfileRecord",
    "TRANSITION_INDEX",
    "Thresholds",
    "acf",
    "adf_pvalue",
    "adf_test",
    "channel_features",
    "characterize_dataset",
    "characterize_series",
    "classify_characteristics",
    "correlation_score",
    "feature_vector",
    "first_zero_acf",
    "mackinnon_pvalue",
    "pfa_select",
    "profile_records",
    "seasonality_strength",
    "shifting_value",
    "stationarity",
    "stl_decompose",
    "transition_value",
    "trend_strength",
]
