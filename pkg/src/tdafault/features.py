"""Window featurization of decomposed signals.

Each analysis window yields one 9-dimensional token: five residual-channel
features (Hull-EMA endpoint and mean, skewness, excess kurtosis, RMS), two
trend-channel features (mean, least-squares slope) and two seasonal-channel
features (RMS, lag-1 autocorrelation).  Tokens from consecutive windows form
the sequences the classifier consumes.

Moment conventions are population central moments; degenerate (constant)
windows yield 0 rather than NaN for the moment ratios and the
autocorrelation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .movavg import MaConfig, hema

__all__ = [
    "WindowSpec",
    "TokenSequence",
    "Standardizer",
    "CHANNEL_MAP",
    "FEATURE_NAMES",
    "skewness",
    "kurtosis_excess",
    "rms",
    "featurize",
]

# Desk-scale default (synthetic runs); 48 kHz recordings use 2048/1024.
DESK_WINDOW_LEN = 256
DESK_WINDOW_STRIDE = 128
FULLRATE_WINDOW_LEN = 2048
FULLRATE_WINDOW_STRIDE = 1024

_VAR_FLOOR = 1e-24

FEATURE_NAMES = (
    "res_hema_last",
    "res_hema_mean",
    "res_skewness",
    "res_kurtosis",
    "res_rms",
    "trend_mean",
    "trend_slope",
    "season_rms",
    "season_lag1_corr",
)

CHANNEL_MAP: dict[str, tuple[int, int]] = {
    "residual_feats": (0, 5),
    "trend_feats": (5, 7),
    "seasonal_feats": (7, 9),
}


@dataclass(frozen=True)
class WindowSpec:
    """Sliding-window geometry: length and stride in samples."""

    length: int = DESK_WINDOW_LEN
    stride: int = DESK_WINDOW_STRIDE

    def __post_init__(self) -> None:
        if self.length < 8:
            raise ValueError(f"window length must be >= 8, got {self.length}")
        if self.stride < 1:
            raise ValueError(f"stride must be >= 1, got {self.stride}")

    def count(self, n_samples: int) -> int:
        """Number of full windows available in a series of given length."""
        if n_samples < self.length:
            raise ValueError(
                f"series of length {n_samples} is shorter than the window ({self.length})"
            )
        return (n_samples - self.length) // self.stride + 1


@dataclass
class Standardizer:
    """Per-feature mean/std fitted on the training split and reused verbatim.

    Features whose training std collapses below the floor are flagged
    constant and passed through centred but unscaled.
    """

    mean: np.ndarray
    std: np.ndarray
    constant_mask: np.ndarray

    @classmethod
    def fit(cls, tokens: np.ndarray) -> "Standardizer":
        tokens = np.asarray(tokens, dtype=np.float64)
        mean = tokens.mean(axis=0)
        std = tokens.std(axis=0)
        constant = std < 1e-12
        safe = np.where(constant, 1.0, std)
        return cls(mean=mean, std=safe, constant_mask=constant)

    def transform(self, tokens: np.ndarray) -> np.ndarray:
        return (np.asarray(tokens, dtype=np.float64) - self.mean) / self.std

    def to_dict(self) -> dict:
        return {
            "mean": self.mean.tolist(),
            "std": self.std.tolist(),
            "constant_mask": self.constant_mask.astype(bool).tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Standardizer":
        return cls(
            mean=np.asarray(d["mean"], dtype=np.float64),
            std=np.asarray(d["std"], dtype=np.float64),
            constant_mask=np.asarray(d["constant_mask"], dtype=bool),
        )


@dataclass
class TokenSequence:
    """T x F token matrix for one recording plus channel bookkeeping."""

    tokens: np.ndarray
    channel_map: dict[str, tuple[int, int]] = field(default_factory=lambda: dict(CHANNEL_MAP))
    label: str | None = None
    standardization: Standardizer | None = None

    def __len__(self) -> int:
        return self.tokens.shape[0]

    @property
    def n_features(self) -> int:
        return self.tokens.shape[1]

    def standardized(self, standardizer: Standardizer) -> "TokenSequence":
        return TokenSequence(
            tokens=standardizer.transform(self.tokens),
            channel_map=dict(self.channel_map),
            label=self.label,
            standardization=standardizer,
        )


def _central_moments(x: np.ndarray, upto: int) -> list[float]:
    centred = x - x.mean()
    return [float(np.mean(centred**k)) for k in range(2, upto + 1)]


def skewness(x) -> float:
    """Population skewness ``m3 / m2**1.5``; 0 for constant windows."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.size < 3:
        raise ValueError(f"skewness needs at least 3 samples, got {arr.size}")
    m2, m3 = _central_moments(arr, 3)
    if m2 < _VAR_FLOOR:
        return 0.0
    return m3 / m2**1.5


def kurtosis_excess(x) -> float:
    """Population excess kurtosis ``m4 / m2**2 - 3``; 0 for constant windows."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.size < 4:
        raise ValueError(f"kurtosis needs at least 4 samples, got {arr.size}")
    m2, _, m4 = _central_moments(arr, 4)
    if m2 < _VAR_FLOOR:
        return 0.0
    return m4 / m2**2 - 3.0


def rms(x) -> float:
    arr = np.asarray(x, dtype=np.float64)
    return float(np.sqrt(np.mean(arr**2)))


def _slope(x: np.ndarray) -> float:
    t = np.arange(x.size, dtype=np.float64)
    t -= t.mean()
    denom = float(np.dot(t, t))
    if denom == 0.0:
        return 0.0
    return float(np.dot(t, x - x.mean()) / denom)


def _lag1_autocorr(x: np.ndarray) -> float:
    centred = x - x.mean()
    denom = float(np.dot(centred, centred))
    if denom < _VAR_FLOOR:
        return 0.0
    return float(np.dot(centred[:-1], centred[1:]) / denom)


def _window_token(res: np.ndarray, tr: np.ndarray, se: np.ndarray, ma: MaConfig) -> np.ndarray:
    filtered = hema(res, ma)
    valid = filtered.valid_values
    smooth_mean = float(np.mean(valid)) if valid.size else float(np.mean(filtered.values))
    return np.array(
        [
            filtered.values[-1],
            smooth_mean,
            skewness(res),
            kurtosis_excess(res),
            rms(res),
            float(tr.mean()),
            _slope(tr),
            rms(se),
            _lag1_autocorr(se),
        ]
    )


def featurize(decomp, spec: WindowSpec, ma: MaConfig | None = None, label: str | None = None) -> TokenSequence:
    """Slice a decomposition into windows and compute one token per window.

    The Hull-EMA features are computed from each window's residual samples
    alone, so tokens depend only on their own window.

    Parameters
    ----------
    decomp : Decomposition
        Aligned trend/seasonal/residual components.
    spec : WindowSpec
        Window length and stride.
    ma : MaConfig, optional
        Hull-EMA configuration; defaults to a window of 16 with
        window-derived alphas.
    label : str, optional
        Class identifier attached to the sequence (falls back to nothing).
    """
    if ma is None:
        ma = MaConfig(window=16)
    n = decomp.residual.size
    count = spec.count(n)

    tokens = np.empty((count, len(FEATURE_NAMES)))
    for w in range(count):
        lo = w * spec.stride
        hi = lo + spec.length
        tokens[w] = _window_token(
            decomp.residual[lo:hi], decomp.trend[lo:hi], decomp.seasonal[lo:hi], ma
        )
    if not np.all(np.isfinite(tokens)):
        raise ValueError("featurization produced non-finite values")
    return TokenSequence(tokens=tokens, label=label)
