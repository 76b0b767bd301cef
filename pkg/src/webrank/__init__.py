"""Exact computation of the rank of codimension-one webs."""
from .connection import connection_at, curvature, curvature_at, curvature_vanishes, frame_R_h
from .engine import (
    INCONCLUSIVE,
    RANK_DETERMINED,
    RANK_ZERO,
    AnalysisReport,
    Config,
    analyze_rank,
    check_general_position,
    check_ordinary,
    proposition_5_2_check,
    rho,
    rho_via_char_determinants,
)
from .expr import differentiate, format_expression, parse_expression
from .jets import Jet, eval_jet
from .report import ReportDocument, format_text, load_corpus, load_web_file
from .web import WebSpec, combinatorics

__version__ = "0.1.0"
