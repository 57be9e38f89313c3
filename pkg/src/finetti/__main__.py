from finetti.cli import main

main()
