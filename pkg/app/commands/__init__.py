from app.commands import compare, evaluate, generalize, train

# subcommand modules, in help order
COMMANDS = (train, evaluate, compare, generalize)

__all__ = ["COMMANDS"]
