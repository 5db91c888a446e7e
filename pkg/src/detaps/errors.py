"""Exception hierarchy shared by every layer of the package."""


class DetapsError(Exception):
    pass


class DecodeError(DetapsError, ValueError):
    """Malformed, off-curve or non-canonical bytes."""


class AuthFailure(DetapsError):
    """Authenticated decryption rejected the ciphertext or key."""


class BadThreshold(DetapsError, ValueError):
    pass


class BadBound(DetapsError, ValueError):
    pass


class BadCapacity(DetapsError, ValueError):
    pass


class NotInQuorum(DetapsError):
    pass


class WrongQuorumSize(DetapsError):
    pass


class QuorumMismatch(DetapsError):
    pass


class InsufficientShares(DetapsError):
    pass


class ShareInvalid(DetapsError):
    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"share from signer {index} failed verification")


class ThresholdTooLarge(DetapsError, ValueError):
    pass


class UnknownPid(DetapsError, KeyError):
    pass


class UnknownNotary(DetapsError, KeyError):
    pass


class UnknownGroup(DetapsError, KeyError):
    pass


class OutOfRange(DetapsError, ValueError):
    pass


class OutOfScope(DetapsError):
    pass


class TooManyPids(DetapsError, ValueError):
    pass


class WitnessMismatch(DetapsError):
    pass


class SigInvalid(DetapsError):
    """A combiner signature (eta) failed to verify; the notary aborts."""


class ValidationFailed(DetapsError):
    pass


class InvalidSignature(DetapsError):
    """Trace was asked to open a signature that does not verify."""


class Unauthorized(DetapsError):
    pass


class BadSignature(DetapsError):
    pass


class EmptyPool(DetapsError):
    pass


class ConfigError(DetapsError, ValueError):
    pass
