from .backends import (
    BackendHandle,
    BackendSet,
    HttpBackend,
    MockBackend,
    SubprocessBackend,
    call,
    load_roster,
    register_mock,
)
from .cache import ResponseCache, cache_key, default_cache_dir
from .protocol import (
    CAPABILITIES,
    OPTIONAL_CAPABILITIES,
    CapabilityRequest,
    CapabilityResponse,
    Part,
    binary_part,
    decode_scoremap_body,
    encode_scoremap_body,
    matrix_part,
    strings_part,
    text_part,
    validate_response,
)

__all__ = [
    "BackendHandle",
    "BackendSet",
    "HttpBackend",
    "MockBackend",
    "SubprocessBackend",
    "call",
    "load_roster",
    "register_mock",
    "ResponseCache",
    "cache_key",
    "default_cache_dir",
    "CAPABILITIES",
    "OPTIONAL_CAPABILITIES",
    "CapabilityRequest",
    "CapabilityResponse",
    "Part",
    "binary_part",
    "decode_scoremap_body",
    "encode_scoremap_body",
    "matrix_part",
    "strings_part",
    "text_part",
    "validate_response",
]
