"""Direct non-parametric estimation of multi-dimensional density
derivatives, with density-ratio estimation, metric-learned KL divergence,
change-point scoring and feature selection built on top."""

from .changepoint import (
    ChangeScoreSeries,
    WindowConfig,
    change_scores,
    embed_windows,
    roc_auc,
)
from .datasets import (
    ChangeSeriesSpec,
    GGParams,
    generate_change_series,
    gg_kl,
    gg_pdf,
    make_experiment_densities,
    normal_derivative_truth,
    sample_gg,
    sample_normal,
    solve_unit_variance_beta,
)
from .derivatives import (
    CvGrid,
    MisedModel,
    cross_validate_mised,
    default_cv_grid,
    fit_mised,
    load_model,
    mised_objective,
    predict_derivative,
    save_model,
)
from .divergence import (
    LocalMetric,
    MisedMetricConfig,
    build_b_tilde,
    gaussian_metric_kl,
    gaussian_parametric_kl,
    hessian_field,
    local_metric_from_b,
    mised_metric_kl,
    nn_kl,
    nn_kl_metric,
)
from .errors import NumericalError
from .features import forward_select, js_divergence
from .kde import KdeModel, cross_validate_kde, fit_kde, kde_density, kde_derivative
from .kernels import (
    gauss_kernel,
    gauss_kernel_partial,
    gram_entry,
    gram_matrix,
    h_vector,
    multi_indices,
)
from .metrics import binary_auc, normalized_mse
from .ratio import RatioModel, fit_ulsif, predict_ratio

__version__ = "0.1.0"
