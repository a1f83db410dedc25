"""Total positivity: exact checkers, entrywise preservers, and TP completions."""

from .checker import (
    Certificate,
    CheckRequest,
    SizeGuardError,
    Verdict,
    check,
    is_pos_def,
    is_tn,
    is_tp,
    is_tp_hankel,
    structure_tests,
)
from .completion import (
    UnsupportedError,
    VerificationError,
    complete_hankel_sym,
    densify_to_tp,
    embed_2x2_at_position,
    embed_2x2_vandermonde,
    embed_equally_spaced,
    extend_backwards,
)
from .expr import ParseError, parse_expression
from .numkernel import DomainError, Matrix, MinorIndex, det, minor, rank
from .transforms import (
    Constant,
    CounterexampleCertificate,
    Expression,
    Mode,
    Power,
    PreserverQuery,
    apply_entrywise,
    classify_preservers,
    falsify,
    hadamard_power,
    is_power_preserver,
    random_tn,
)
