"""NOOV: lexicon- and phrase-table-augmented attention NMT.

The pipeline: ingest a line-aligned parallel corpus, induce bilingual
lexicons with EM, train a biLSTM encoder / attention decoder, then beam
decode with a lexicon-biased output distribution and phrase-table
repetition repair, and score with BLEU.
"""

__version__ = "0.1.0"

from .align import EmConfig, Lexicon, ibm1_em, context_lexicon  # noqa: F401
from .corpus import ParallelCorpus, SplitSpec, Vocabulary, load_parallel  # noqa: F401
from .decode import DecodeConfig, LexiconProvider, beam_search  # noqa: F401
from .evaluation import bleu_corpus, length_bucket_report  # noqa: F401
from .model import ModelConfig, NoovModel, fine_tune, load_checkpoint  # noqa: F401
from .phrasebook import PhraseTable, find_match  # noqa: F401
