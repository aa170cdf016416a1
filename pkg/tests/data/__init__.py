from .reference_files import *
