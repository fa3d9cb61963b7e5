#!/usr/bin/env python3
"""Writes DER-encoded RSA keys used by the scanner tests.

Keys come from the `cryptography` package so the scanner is checked against
an encoder it shares no code with.
"""
import pathlib

from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric import rsa

out = pathlib.Path(__file__).resolve().parents[2] / "tests" / "fixtures" / "rsa"
out.mkdir(parents=True, exist_ok=True)

for bits, count in ((1024, 3), (2048, 4), (3072, 2), (4096, 1)):
    for i in range(count):
        key = rsa.generate_private_key(public_exponent=65537, key_size=bits)
        priv = key.private_bytes(serialization.Encoding.DER,
                                 serialization.PrivateFormat.TraditionalOpenSSL,
                                 serialization.NoEncryption())
        pub = key.public_key().public_bytes(serialization.Encoding.DER,
                                            serialization.PublicFormat.PKCS1)
        (out / f"private_{bits}_{i}.der").write_bytes(priv)
        (out / f"public_{bits}_{i}.der").write_bytes(pub)
        if bits == 2048 and i == 0:
            pkcs8 = key.private_bytes(serialization.Encoding.DER,
                                      serialization.PrivateFormat.PKCS8,
                                      serialization.NoEncryption())
            (out / "pkcs8_2048_0.der").write_bytes(pkcs8)
