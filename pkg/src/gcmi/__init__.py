"""Conditional adversarial imputation of missing tabular data.

Per-column generator/discriminator pairs trained with least-squares
adversarial losses are chained column-by-column until a dual convergence
criterion stabilises, producing M completed datasets whose estimates pool
with the usual within/between variance rules.  The package also ships a
missingness simulation lab (equicorrelated Gaussian data, MCAR/MAR/MNAR
amputation), a mean/mode baseline, and a Monte Carlo benchmark harness.
"""

from .benchmark import (
    BenchmarkRow,
    BenchmarkSpec,
    BenchmarkTable,
    MethodSpec,
    mean_impute,
    rmse,
    run_benchmark,
)
from .chained import (
    ConvergenceTrace,
    GcmiConfig,
    ImputationResult,
    PooledEstimate,
    convergence_gamma,
    gcmi_impute,
    initial_fill,
    order_columns,
    rubin_pool,
    save_result,
    sweep,
)
from .config import RunConfig, load_config, parse_config
from .data import (
    ColumnSchema,
    DataMatrix,
    Normalization,
    denormalize,
    matrix_from_array,
    normalize,
    read_csv,
    write_csv,
    write_mask_csv,
)
from .errors import (
    ConfigError,
    DataError,
    GcmiError,
    InsufficientDataError,
    NumericError,
    ShapeError,
    UnimputableColumnError,
)
from .gcin import (
    GcinPair,
    TrainConfig,
    TrainTrace,
    impute_column,
    scale_architecture,
    train_gcin,
)
from .losses import (
    DiscreteDist,
    accuracy_penalty,
    chi2_generator_objective,
    discriminator_loss,
    generator_loss,
    optimal_discriminator,
)
from .nn import (
    AdamState,
    Mlp,
    ParamGrads,
    adam_new,
    adam_step,
    backward,
    backward_with_input_grads,
    forward,
    load_mlp,
    mlp_new,
    save_mlp,
)
from .simulate import (
    AmputationSpec,
    SyntheticSpec,
    ampute,
    ampute_mar,
    ampute_mcar,
    ampute_mnar,
    gen_synthetic,
)

__version__ = "0.1.0"
