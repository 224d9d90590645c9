"""Ed25519 signing helpers.

Thin wrapper over ``cryptography`` keeping key material as raw 32-byte
strings so documents and logs stay canonical and comparable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat

ALGORITHM = "Ed25519"


@dataclass(frozen=True)
class KeyPair:
    """An Ed25519 keypair with raw public bytes exposed."""

    private_bytes: bytes = field(repr=False)
    public_bytes: bytes

    @classmethod
    def generate(cls, seed: bytes | None = None) -> "KeyPair":
        """Create a keypair, deterministically when a 32-byte seed is given."""
        if seed is None:
            private = Ed25519PrivateKey.generate()
            from cryptography.hazmat.primitives.serialization import (
                NoEncryption,
                PrivateFormat,
            )

            raw = private.private_bytes(Encoding.Raw, PrivateFormat.Raw, NoEncryption())
        else:
            if len(seed) != 32:
                raise ValueError("Ed25519 seed must be exactly 32 bytes")
            raw = seed
            private = Ed25519PrivateKey.from_private_bytes(raw)
        public = private.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw)
        return cls(private_bytes=raw, public_bytes=public)

    def sign(self, message: bytes) -> bytes:
        key = Ed25519PrivateKey.from_private_bytes(self.private_bytes)
        return key.sign(message)


def verify_signature(public_bytes: bytes, message: bytes, signature: bytes) -> bool:
    """True iff ``signature`` is a valid Ed25519 signature over ``message``."""
    try:
        Ed25519PublicKey.from_public_bytes(public_bytes).verify(signature, message)
        return True
    except (InvalidSignature, ValueError):
        return False
