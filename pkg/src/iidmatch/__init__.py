"""Online stochastic bipartite matching under known-IID arrivals.

Library layout mirrors the pipeline: instances -> benchmark LPs -> dependent
rounding -> matching decomposition / sparsification -> online algorithms ->
Monte Carlo harness, with the analytic module reproducing the ratio
constants independently of the simulations.
"""
from .analytic import (BaseProbs, ChainConfig, base_probs, bmatch_bound, constants_report,
                       ew0_ratio, ew1_ratios, ew2_ratios, g_prob_closed, g_prob_markov,
                       gamma_tables, mix_optimize, p_u_combine, uniform_F,
                       uniform_delta_max, vw_mix_min)
from .bench_lp import (FracSolution, LinearProgram, build_base_lp, build_bmatch_lp,
                       build_stoch_lp, build_uniform_lp, export_mps, separate_uniform,
                       solve, solve_uniform)
from .decomp import MatchingPlan, decompose, pm3, pm_star
from .harness import (RatioEstimate, ValidationError, estimate_ratio, per_edge_report,
                      sm_edge_match_frequencies)
from .instance import (Edge, Instance, SchemaError, canonicalize, from_json, gen_gadget,
                       gen_random, to_json, validate)
from .online_algs import (AlgorithmParams, ArrivalSequence, RunResult, attenuate,
                          gen_two_choice_list, run_ew, run_ew0, run_ew07, run_ew1,
                          run_ew2, run_sm, run_smb, run_unifp, run_vw, sample_arrivals)
from .rounding import IntegralVector, dr, dr_thirds
from .sparsify import (CycleReport, ModifiedVector, ThirdsVector, break_cycles,
                       find_cycles4, sample_list, second_modification)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
