'''
Copyright (C) 2024 The ctnn developers

Please see the LICENSE file for the terms and conditions
associated with this software.


Defines contains the constant definitions shared by the ctnn modules:
frame geometry, network shape, activation names, modality names and
file format markers.
'''
# Frame geometry. A sensory frame is two 28x28 grids side by side,
# visual on the left and audio on the right.
GRID_SIZE = 28
MODALITY_SIZE = GRID_SIZE * GRID_SIZE
FRAME_SHAPE = (GRID_SIZE, 2 * GRID_SIZE)
FRAME_SIZE = 2 * MODALITY_SIZE
MAX_INTENSITY = 255.0
# largest possible difference score, 255 ** 2
MAX_DIFFERENCE = MAX_INTENSITY * MAX_INTENSITY

NUM_CLASSES = 10

# Modalities
VISUAL = 'visual'
AUDIO = 'audio'
MODALITIES = (VISUAL, AUDIO)

# Network
LATENT_SIZE = 100
DEFAULT_TOPOLOGY = (FRAME_SIZE, 512, 256, LATENT_SIZE, 256, 512, FRAME_SIZE)
REDUCED_TOPOLOGY = (16, 8, 4, 2, 4, 8, 16)
TOPOLOGY_LENGTH = 7
ENCODER_LAYERS = 3

# Activations
RELU = 'relu'
SIGMOID = 'sigmoid'

# Optimizers
ADAM = 'adam'
SGD = 'sgd'

# Weight file
WEIGHT_MAGIC = b'CTNN1\n'

# Difference score landmarks on the 0-255 scale
DEFAULT_THRESHOLD = 100.0
SIMILAR_CEILING = 20.0
DISSIMILAR_FLOOR = 100.0

# Artifact names
LOSSES_CSV = 'losses.csv'
EFFICIENCY_CSV = 'efficiency.csv'
OCCLUSION_CSV = 'occlusion.csv'
TRACE_CSV = 'trace.csv'
MANIFEST_CSV = 'manifest.csv'
SEQUENCE_CSV = 'sequence.csv'
RUN_MANIFEST = 'manifest.json'
WEIGHTS_FILE = 'weights.ctnn'

# Trace dump rows (previous reconstruction, incoming, difference, new reconstruction)
DUMP_PREVIOUS = 'previous'
DUMP_INCOMING = 'incoming'
DUMP_DIFFERENCE = 'difference'
DUMP_RECONSTRUCTION = 'reconstruction'
DUMP_ROWS = (DUMP_PREVIOUS, DUMP_INCOMING, DUMP_DIFFERENCE, DUMP_RECONSTRUCTION)
