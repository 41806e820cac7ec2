'''
Copyright (C) 2024 The ctnn developers

Please see the LICENSE file for the terms and conditions
associated with this software.
'''
from ctnn.network import AutoEncoder, build_autoencoder, load_weights, save_weights, train
from ctnn.thalamus import CtnnState, ctnn_step, run_sequence
