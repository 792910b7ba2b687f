"""Complex approximate message passing with non-separable sparse group LASSO denoising."""

from .amp import (AMP, ISTA, AmpState, CenteredIterates, Trajectory, amp_step, centered_functions,
                  ista_step, ista_step_size, run_centered_amp, run_recovery)
from .core import (ConfigurationError, DivergenceError, DomainError, GroupStructure, OracleUnreliableError,
                   ProblemConfig, ProblemInstance, generate_instance, nmse, sample_complex_gaussian_matrix,
                   snr_to_noise_variance, trial_rng)
from .denoisers import (COMPILED, DenoiserKind, DenoiserSpec, Thresholds, apply_denoiser, denoise,
                        onsager_mean, sgl_onsager_mean, soft_threshold, wirtinger_fd)
from .se import SeConfig, SeTrajectory, relation_coefficient, se_predict, se_step, se_tau0

__version__ = "0.1.0"
