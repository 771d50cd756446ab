from blaschke_stab.main import main

raise SystemExit(main())
