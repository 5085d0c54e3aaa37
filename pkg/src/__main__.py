"""支持 python -m src 命令"""

from src.cli import main

if __name__ == "__main__":
    main()
