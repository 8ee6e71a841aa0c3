"""Linear and layered subspace generators trained adversarially on toy data."""

from ._core import (
    ContractError,
    DegenerateSpectrum,
    FormatError,
    LayeredConfig,
    LayeredModel,
    LinearModel,
    ShapeError,
    TrainConfig,
    TrainingDiverged,
    basis_similarity,
    bench_spec_default_json,
    covariance,
    entropy_coefficient_from_bins,
    load_model,
    make_dataset,
    pca_basis,
    ppca_mle,
    run_bench,
    sym_eig,
    table_train_config,
    train,
)

__all__ = [name for name in dir() if not name.startswith("_")]
