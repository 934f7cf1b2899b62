from . import compare, ingest, metrics, profile, run, synth, validate

COMMANDS = [ingest, run, compare, metrics, synth, profile, validate]
