from .rules import Report, ProofError, check_proof, parse_domain
from .script import ProofNode, ProofScript, parse_proof_script

__all__ = ["Report", "ProofError", "check_proof", "parse_domain", "ProofNode", "ProofScript",
           "parse_proof_script"]
