"""Virtual address translation cost simulator and analytic bounds."""

from .addrmodel import (AddressSpaceConfig, NodeId, TranslationPath, decompose,
                        path_divergence, recompose, translation_path,
                        validate_order_assumptions)
from .errors import (AddressRangeError, ConfigError, PreconditionError,
                     SequencingError, TraceFormatError, VatError)
from .simulator import (EMConfig, NestedResult, normalized_fault_rate, run_em,
                        run_nested_vat, run_vat, sweep)
from .tc import (PolicyKind, SimResult, TranslationCache, TranslationStats,
                 isp_holds, new_cache, run_trace)
from .traceio import read_trace, write_trace
from .workloads import Trace, TraceStats, WorkloadKind, gen, trace_stats

__version__ = "0.1.0"
