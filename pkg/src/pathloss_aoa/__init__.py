"""Angle-of-arrival estimation from path loss with cosine beam models."""

__version__ = "0.1.0"

from .beam import (
    CosineBeamPattern,
    FreeSpaceLink,
    Pointing,
    RisLink,
    fs_total_pl_db,
    ris_total_pl_db,
)
from .crlb import CrlbConfig, CrlbCurve, crlb_rmse_curve, crlb_var
from .datasets import SweepDataset, generate_fs_sweep, generate_ris_samples
from .estimators import AoaModel, fit_directivity, saber_fit, saber_predict
from .metrics import mae, monte_carlo_pl_cdf, rmse
from .sr import ParetoFront, SrConfig

__all__ = [
    "AoaModel", "CosineBeamPattern", "CrlbConfig", "CrlbCurve", "FreeSpaceLink", "ParetoFront", "Pointing",
    "RisLink", "SrConfig", "SweepDataset", "crlb_rmse_curve", "crlb_var", "fit_directivity", "fs_total_pl_db",
    "generate_fs_sweep", "generate_ris_samples", "mae", "monte_carlo_pl_cdf", "ris_total_pl_db", "rmse",
    "saber_fit", "saber_predict",
]
