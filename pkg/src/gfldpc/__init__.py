"""Min-sum decoding of non-binary LDPC codes with a trellis-scan check-node update."""

from .channel import (ChannelError, ChannelParams, costs_to_probs, ebn0_sweep, modulate,
                      symbol_bits, symbol_costs, transmit)
from .code_graph import (Code, CodeError, ParseError, energy, is_codeword, load_code,
                         parse_code_file, random_codeword, random_regular_code,
                         serialize_code, syndrome)
from .decoder import (DecodeResult, DecoderConfig, DecoderError, MessageState, decode,
                      decode_sumproduct, hard_decision, horizontal_step, init_messages,
                      posterior_and_decide, vertical_step)
from .galois import Field, FieldError, field_new
from .sim import RunConfig, TrialReport, run_ber_sweep, run_checknode_bench, write_csv
from .trellis import (INFINITE, MINSUM, SUMPROD, TrellisError, checknode_minsum,
                      checknode_minsum_truncated, checknode_oracle, checknode_sumproduct,
                      left_scan, right_scan)

__version__ = "0.1.0"
