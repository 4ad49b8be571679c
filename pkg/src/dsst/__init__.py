"""Downsampled synchrosqueezing transform.

Forward STFT with time hop ``Ht`` and DFT length ``Nf``, selective and
subdivided reassignment, a direct overlap-add inverse, ridge tracking and
the metrics used to tune the downsampling factors.
"""
from . import _backend
from .analysis import BoundsReport, compute_bounds, output_snr, renyi_entropy, rf_model, rmse
from .errors import InvalidArgument, NoRidgeError, ReconstructionCoverageError
from .ridge import (
    RidgeZone,
    extract_ridge,
    retrieve_mode,
    retrieve_mode_full,
    retrieve_mode_stft,
    ridge_freqs,
    zone_from_ridge,
)
from .signal import IfTrack, Signal, add_white_noise, make_simulated_signal, true_ifs
from .sst import (
    IfEstimate,
    SstParams,
    if_estimate,
    reassignment_frequency,
    squeeze_stage,
    sst,
    sst_inverse,
    synchrosqueeze,
)
from .stft import (
    Kind,
    StftPlan,
    TfMatrix,
    WindowPair,
    band_filter,
    get_threads,
    make_window,
    set_threads,
    stft_forward,
    stft_inverse,
    stft_pair,
)

BACKEND = _backend.NAME

__version__ = "0.1.0"
