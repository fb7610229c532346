"""Parsing and printing of the FOF/TPI subset of TPTP."""

from .check import GrammarReport, grammar_order_check
from .parser import parse_file, parse_formula, parse_general_term, parse_script
from .printer import print_formula, print_general, print_script, print_statement, print_term

__all__ = [
    "GrammarReport", "grammar_order_check", "parse_file", "parse_formula", "parse_general_term",
    "parse_script", "print_formula", "print_general", "print_script", "print_statement", "print_term",
]
