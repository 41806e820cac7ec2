'''
Copyright (C) 2024 The ctnn developers

Please see the LICENSE file for the terms and conditions
associated with this software.


Command line entry point. Every subcommand is a one-shot, deterministic run:
flags override the config file, which overrides the built-in defaults, and the
resolved config lands in manifest.json at the root of --out.
'''
import argparse
import logging
import os
import sys

from ctnn.backends.manifest import write_manifest
from ctnn.backends.pgm import FrameDumpCallback
from ctnn.backends.table import TraceCSVCallback
from ctnn.config import Config
from ctnn.dataset import (Augmentation, SequenceSpec, export_dataset, export_sequence, load_dataset, make_sequence,
                          make_test_set)
from ctnn.defines import MANIFEST_CSV, MODALITIES, RUN_MANIFEST, TRACE_CSV, WEIGHTS_FILE
from ctnn.exceptions import (ConfigError, DatasetError, ImageFormatError, PreconditionViolation, ReconstructionMismatch,
                             TopologyError, TopologyMismatch, TrainingDiverged, WeightFormatError)
from ctnn.experiments import run_efficiency_sweep, run_occlusion_demo, run_occlusion_sweep, run_training_experiment, sweep_paths
from ctnn.log import get_logger
from ctnn.network import load_weights
from ctnn.thalamus import run_sequence


LOG = logging.getLogger('ctnn')

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_DIVERGED = 4
EXIT_MISMATCH = 5


def _common(parser: argparse.ArgumentParser):
    parser.add_argument('--seed', type=int, default=None, help='Master seed for every random draw of the command')
    parser.add_argument('--out', type=str, default=None, help='Output directory, manifest.json is written at its root')
    parser.add_argument('--config', type=str, default=None, help='YAML or JSON config file')
    parser.add_argument('--weights', type=str, default=None, help='Weight file (default: <out>/weights.ctnn)')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='ctnn', description='Corticothalamic auto-encoder: data, training, stream runs and sweeps')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('gen-data', help='Write the synthetic digit dataset as PGM frames plus manifest.csv')
    _common(p)
    p.add_argument('--per-class', type=int, default=None, help='Frames per digit')

    p = sub.add_parser('train', help='Train the cortex auto-encoder, write losses.csv and the weight file')
    _common(p)
    p.add_argument('--epochs', type=int, default=None)
    p.add_argument('--per-class', type=int, default=None, help='Frames per digit when generating the training set')
    p.add_argument('--data', type=str, default=None, help='Train on a directory written by gen-data')

    p = sub.add_parser('run', help='Stream a generated sequence through the thalamus and write the trace')
    _common(p)
    p.add_argument('--threshold', type=float, default=None)
    p.add_argument('--similar', type=float, default=None, help='Share of same-class transitions in the sequence')
    p.add_argument('--length', type=int, default=None)
    p.add_argument('--dump-frames', action='store_true', help='Write previous/incoming/difference/reconstruction PGMs per step')

    p = sub.add_parser('sweep', help='Efficiency or occlusion sweep')
    _common(p)
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument('--efficiency', action='store_true')
    mode.add_argument('--occlusion', action='store_true')
    p.add_argument('--workers', type=int, default=None)

    p = sub.add_parser('demo-occlusion', help='Occlude one modality of a frame and check the class is recovered')
    _common(p)
    p.add_argument('--digit', type=int, default=None)
    p.add_argument('--modality', choices=MODALITIES, default=None)
    p.add_argument('--fraction', type=float, default=None)
    return parser


def resolve_config(args: argparse.Namespace) -> Config:
    config = Config(args.config) if args.config else Config()
    flags = {
        'seed': args.seed,
        'out': args.out,
        'dataset': {'per_class': getattr(args, 'per_class', None)},
        'training': {'epochs': getattr(args, 'epochs', None)},
        'threshold': getattr(args, 'threshold', None),
        'sequence': {'length': getattr(args, 'length', None), 'similar_fraction': getattr(args, 'similar', None)},
        'sweep': {'workers': getattr(args, 'workers', None)},
        'demo': {'digit': getattr(args, 'digit', None), 'modality': getattr(args, 'modality', None),
                 'fraction': getattr(args, 'fraction', None)},
    }
    return config.override(flags)


def _setup_logging(config: Config):
    if config.log.get('disabled'):
        return
    filename = config.log.get('filename')
    if filename and not os.path.isabs(filename):
        filename = os.path.join(config.out, filename)
    get_logger('ctnn', filename, getattr(logging, str(config.log.get('level', 'WARNING')).upper(), logging.WARNING))


def _weights(args, config: Config) -> str:
    return args.weights or os.path.join(config.out, WEIGHTS_FILE)


def _model(args, config: Config):
    return load_weights(_weights(args, config), topology=config.model.topology)


def cmd_gen_data(args, config: Config) -> int:
    count = export_dataset(config.out, int(config.dataset.per_class), int(config.seed), Augmentation.from_config(config.dataset))
    write_manifest(config.out, 'gen-data', config.to_dict(), artifacts=[os.path.join(config.out, MANIFEST_CSV)])
    print(f'{count} frames written to {config.out}')
    return EXIT_OK


def cmd_train(args, config: Config) -> int:
    train_set = load_dataset(args.data) if args.data else None
    result = run_training_experiment(config, config.out, train_set=train_set)
    weights = result.weights
    if args.weights and os.path.abspath(args.weights) != os.path.abspath(weights):
        os.replace(weights, args.weights)
        weights = args.weights
    write_manifest(config.out, 'train', config.to_dict(), weights=weights, artifacts=[result.losses])
    final = result.history.final()
    if final:
        print(f'epochs={len(result.history)} train_loss={final.train_loss:.6f} test_loss={final.test_loss}')
    else:
        print('epochs=0')
    return EXIT_OK


def cmd_run(args, config: Config) -> int:
    model = _model(args, config)
    spec = SequenceSpec(int(config.sequence.length), float(config.sequence.similar_fraction), int(config.seed))
    augmentation = Augmentation.from_config(config.dataset)
    frames = make_sequence(spec, augmentation)

    os.makedirs(config.out, exist_ok=True)
    sequence_path = export_sequence(spec, config.out, augmentation)
    trace_path = os.path.join(config.out, TRACE_CSV)
    writer = TraceCSVCallback(trace_path)
    callbacks = [writer]
    if args.dump_frames:
        callbacks.append(FrameDumpCallback(os.path.join(config.out, 'frames')))

    trace = run_sequence(model, float(config.threshold), frames, callbacks)
    writer.flush()
    write_manifest(config.out, 'run', config.to_dict(), weights=_weights(args, config), artifacts=[trace_path, sequence_path])
    print(f'network_calls={trace.network_calls} length={trace.length}')
    return EXIT_OK


def cmd_sweep(args, config: Config) -> int:
    model = _model(args, config)
    sweep = config.sweep
    os.makedirs(config.out, exist_ok=True)
    paths = sweep_paths(config.out)
    workers = int(sweep.get('workers') or 1)
    if args.efficiency:
        result = run_efficiency_sweep(sweep.thresholds, sweep.similar_fractions, int(sweep.length), int(config.seed), model,
                                      Augmentation.from_config(config.dataset), workers)
        path = paths['efficiency']
        result.to_csv(path)
        print(f'{len(result.rows)} efficiency cells written to {path}')
    else:
        test_set = make_test_set(int(sweep.test_per_class), int(config.seed), Augmentation.from_config(config.dataset))
        heatmap = run_occlusion_sweep(model, sweep.occlusion_fractions, test_set, int(config.seed), workers)
        path = paths['occlusion']
        heatmap.to_csv(path)
        print(f'{heatmap.accuracy.size} occlusion cells written to {path} (baseline {heatmap.baseline.value:.3f})')
    write_manifest(config.out, 'sweep', config.to_dict(), weights=_weights(args, config), artifacts=[path])
    return EXIT_OK


def cmd_demo_occlusion(args, config: Config) -> int:
    model = _model(args, config)
    demo = config.demo
    augmentation = Augmentation.from_config(config.dataset)
    test_set = make_test_set(int(config.sweep.test_per_class), int(config.seed), augmentation)
    try:
        result = run_occlusion_demo(model, int(demo.digit), demo.modality, float(demo.fraction), config.out, int(config.seed),
                                    test_set=test_set, augmentation=augmentation)
    except ReconstructionMismatch:
        write_manifest(config.out, 'demo-occlusion', config.to_dict(), weights=_weights(args, config))
        raise
    write_manifest(config.out, 'demo-occlusion', config.to_dict(), weights=_weights(args, config), artifacts=result.images)
    print(f'digit {result.digit} recovered from {result.fraction:.0%} {result.modality} occlusion')
    return EXIT_OK


COMMANDS = {
    'gen-data': cmd_gen_data,
    'train': cmd_train,
    'run': cmd_run,
    'sweep': cmd_sweep,
    'demo-occlusion': cmd_demo_occlusion,
}


def _fail(code: int, msg: str) -> int:
    LOG.error('CLI: %s', msg)
    print(f'ctnn: error: {msg}', file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = resolve_config(args)
        os.makedirs(config.out, exist_ok=True)
        _setup_logging(config)
        LOG.info('CLI: %s, %s', args.command, config.log_msg)
        code = COMMANDS[args.command](args, config)
        LOG.info('CLI: %s done, manifest %s', args.command, os.path.join(config.out, RUN_MANIFEST))
        return code
    except (ConfigError, TopologyError, PreconditionViolation) as e:
        return _fail(EXIT_CONFIG, str(e))
    except TrainingDiverged as e:
        return _fail(EXIT_DIVERGED, str(e))
    except ReconstructionMismatch as e:
        return _fail(EXIT_MISMATCH, str(e))
    except (DatasetError, WeightFormatError, TopologyMismatch, ImageFormatError, OSError) as e:
        return _fail(EXIT_IO, str(e))


if __name__ == '__main__':
    sys.exit(main())
