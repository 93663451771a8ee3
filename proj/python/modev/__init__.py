"""Python front end for the modev C++ library."""

from ._modev import (  # noqa: F401
    ArgumentError,
    ConfigError,
    DomainError,
    Error,
    Model,
    NumericalError,
    catalog_model_ids,
    estimate,
    gramian,
    halfspace_rate,
    laplace_value,
    lln_limit,
    load_model,
    model_from_json,
    noiseless_path,
    pinv_quad_form,
    psd_sqrt,
    run_cli,
    run_ladder,
    simulate_y,
    terminal_rate,
    transition_matrix,
    truncated_inv_sqrt,
    validate_model,
)

__all__ = [name for name in dir() if not name.startswith("_")]
