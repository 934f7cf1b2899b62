from .ingest import load_corpus, read_labeled_records, read_records, read_stays, split_by_accuracy
from .synth import SyntheticCorpus, build_corpus_of_size, generate_synthetic, score_stay_recovery, write_synthetic
from .writers import corpus_bytes, write_outputs, write_split
