"""regiolect: corpus dialectometry toolkit for regional language variation.

Submodules
----------
ingest      stream and filter newline-delimited tweet corpora
textnorm    normalization, tokenization, emoji extraction
vocab       vocabularies, frequency cutoff, Heaps/Zipf fits
affinity    lexical region affinity matrices, emoji rankings
embeddings  word-embedding table I/O and common-token selection
knn         kNN graphs, sparse signatures, semantic affinity
emoji15     emoji prediction benchmark builder and rank harness
cli         command-line pipelines
"""

__version__ = "0.1.0"
