/*
 * Copyright 2024 the battleship training project
 * Released for course use only.
 */
package pp.battleship;

import pp.battleship.model.ShipMap;
import pp.battleship.view.GameView;

/**
 * Application entry point wiring the model, view and network layers.
 */
public class Battleship {
    private final ShipMap map = new ShipMap(10, 10);
    private GameView view;
    private boolean running;

    public Battleship(GameView view) {
        this.view = view;
    }

    public static void main(String[] args) {
        Battleship app = new Battleship(new GameView());
        app.start();
    }

    public void start() {
        running = true;
        Runnable pump = new Runnable() {
            @Override
            public void run() {
                while (running) {
                    view.refresh();
                }
            }
        };
        new Thread(pump, "render-loop").start();
    }

    public void stop() {
        running = false;
    }

    ShipMap map() {
        return map;
    }
}
