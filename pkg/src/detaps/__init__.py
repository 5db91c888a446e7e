"""Decentralized threshold signatures with private, notary-gated accountability.

Signers produce ATS shares for a combiner enclave; the combiner emits a
constant-size signature carrying an encrypted ATS signature (DTPKE), a
searchable notary index (KASE) and a proof of well-formedness. Tracing needs
the notaries named at signing time to cooperate with a tracer enclave.
"""

from .errors import DetapsError
from .scenario import Deployment, RunReport, ScenarioConfig, run_scenario
from .scheme import (SystemKeys, combine, derive_gid, notary_share_response, open_trace_result,
                     setup, sign, trace, verify)
from .signature import DetapsSignature, PublicKey

__all__ = [
    "DetapsError", "DetapsSignature", "Deployment", "PublicKey", "RunReport", "ScenarioConfig",
    "SystemKeys", "combine", "derive_gid", "notary_share_response", "open_trace_result",
    "run_scenario", "setup", "sign", "trace", "verify",
]
