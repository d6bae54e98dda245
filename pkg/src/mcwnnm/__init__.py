"""Channel-weighted low-rank color image denoising."""

from .admm import (AdmmConfig, AdmmState, ChannelWeightMatrix, admm_solve,
                   build_weight_matrix, uniform_weight_matrix)
from .denoiser import (VARIANTS, DenoiseConfig, average_sigma, denoise,
                      preset_config, reestimate_sigmas)
from .image import (ChannelSigmas, ImagePlanes, PatchVector, SIGMA_MIN,
                    add_awgn, estimate_sigmas, extract_patch, psnr)
from .imageio import image_read, image_write
from .lowrank import (SvdFactors, baseline_solve, reweighted_sv_solve,
                      soft_threshold_weighted, svd, wnn_prox, wnnm_closed_form)
from .patches import (PatchGroup, PatchTable, aggregate,
                      assemble_reference_origins, block_match)

__version__ = "0.1.0"
