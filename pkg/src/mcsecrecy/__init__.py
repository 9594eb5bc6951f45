"""Maximal correlation secrecy analysis for finite symmetric-key ciphers."""

from .probcore import (JointPmf, Pmf, chi_square, conditional_pmf, mutual_information,
                       renyi_entropy2, shannon_entropy)
from .ciphermodel import (Cipher, MessageDistributionScenario, deserialize, induced_joint,
                          serialize, validate)
from .spectral import (CorrelationReport, b_matrix, cipher_maximal_correlation,
                       correlation_report, maximal_correlation)
from .constructions import (ExpanderSpec, KeystreamSpec, build_expander_cipher,
                            build_stream_cipher, cascade, expander_lambda2_rho,
                            random_stream_cipher, reference_cipher, walsh_rho)
from .adversary import (AdvantageResult, SideInfoScenario, check_theorem1,
                        entropic_security_check, optimal_advantage, side_info_advantage)

__version__ = "0.1.0"
