"""Physics-informed Gaussian mixture classification for additive-manufacturing defects."""
from pigmm.classifier import (
    ClassifierConfig,
    GenerativeClassifier,
    MetricsReport,
    PosteriorVector,
    classify,
    decision_boundary_grid,
    evaluate,
    fit_classifier,
    posterior,
    train_classifier,
)
from pigmm.data import Dataset, Label, SchemaPreset, load_csv, split, synth_classification, synth_generate, write_csv
from pigmm.features import (
    EnergyFeatureConfig,
    FeaturePipeline,
    apply_pipeline,
    energy_feature,
    fit_pipeline,
    unimodality_gain,
)
from pigmm.gaussian import GaussianComponent, gaussian_logpdf, regularize_covariance
from pigmm.mixture import (
    EmConfig,
    FitReport,
    MixtureModel,
    e_step,
    fit_em,
    kmeanspp_init,
    m_step,
    mixture_logdensity,
    select_components,
)

__version__ = "0.1.0"
