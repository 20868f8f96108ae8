"""Blind source separation via fourth-order kurtosis-tensor eigenpairs.

Modules
-------
signals
    Test-signal generation, mixing, noise, WAV ingestion.
whitening
    Centering and eigendecomposition-based whitening.
tensor
    Third/fourth-order moment tensors and their contractions.
separators
    The tensor-eigenpair separator and its baselines.
metrics
    ISI, ACC, SDR, eigen cosine, SIR improvement.
radar
    Array-radar scene construction (chirp, jamming, steering).
experiments
    The four bundled experiment harnesses.
reporting
    Deterministic CSV/SVG output plus matplotlib figures.
"""

from .signals import (ComplexDataMatrix, MixingMatrix, Signal, SourceSet,
                      add_noise, covariance, gen_sine, gen_square, ingest_wav,
                      mix, random_mixing_matrix, write_wav)
from .whitening import WhiteningResult, center, whiten
from .tensor import (EigenPair, FourthOrderTensor, ThirdOrderTensor,
                     coskewness_tensor, cumulant_matrices,
                     fourth_moment_tensor, kurtosis_gradient, nmode_product,
                     projected_kurtosis, random_statistical_tensor,
                     sample_kurtosis_gradient, symmetrize)
from .separators import (ExtractionError, PkaConfig, UnmixingMatrix, cfastica,
                         fixed_point_deflation, jade, pka, pka_extract, psa,
                         unmix)
from .metrics import (SeparationReport, acc, eigen_cosine, isi, sdr,
                      sir_improvement)
from .radar import (RadarScene, UlaConfig, beamwidth_3db, build_scenario,
                    gen_csi, gen_isrj, gen_lfm, steering_vector)

__version__ = "0.1.0"
