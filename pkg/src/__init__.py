"""CNN to Direct-Hardware-Mapping HDL compiler package."""
