'''
A small sequential neural-network engine on numpy: layers with analytic
backward passes, losses, the Adam optimizer, gradient checking and the
``GDL1`` checkpoint format.
'''

from .tensor import Tensor
from .layers import (Layer, conv2d_forward, Conv2D, Conv2DTranspose, Dense, Embedding, BatchNorm, MaxPool2D,
                     UpsampleNearest, Flatten, Reshape, ReLU, LeakyReLU, Tanh, Sigmoid, Softmax, Dropout)
from .network import Network
from .losses import (loss_categorical_crossentropy, categorical_crossentropy_grad,
                     loss_binary_crossentropy, binary_crossentropy_grad, one_hot, accuracy)
from .optim import Adam, AdamState, adam_update
from .gradcheck import finite_diff_check, gradient_errors
from .checkpoint import save_checkpoint, load_checkpoint
