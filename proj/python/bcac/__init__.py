"""Binary chaotic arithmetic coding with multicast key pools.

Thin re-export of the native module. Bit strings are text such as "001";
keys are digit strings such as "136"; probabilities are numerators over 65536.
"""

from ._core import (
    BcacError,
    bcac_params,
    code_length_bound,
    decode,
    encode,
    header,
    is_pool_member,
    key_bits,
    keygen,
    keyspace_size,
    pool,
    pool_math,
    simulate,
    trace_experiment,
    twin_mode,
    wrap_roundtrip,
)

__all__ = [
    "BcacError",
    "bcac_params",
    "code_length_bound",
    "decode",
    "encode",
    "header",
    "is_pool_member",
    "key_bits",
    "keygen",
    "keyspace_size",
    "pool",
    "pool_math",
    "simulate",
    "trace_experiment",
    "twin_mode",
    "wrap_roundtrip",
]
