"""Transition-based semantic dependency parsing with a pointer network scorer."""

from .graph import Arc, SemanticGraph, Sentence, Token, load_corpus, save_corpus
from .transitions import Transition, initial_config, oracle, replay

__version__ = "0.1.0"
