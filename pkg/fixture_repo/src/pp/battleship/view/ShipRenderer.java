package pp.battleship.view;

import pp.battleship.model.Ship;

/**
 * Draws ships as boxes sized by ship length; a 3d model lookup may replace
 * the box when an asset for the length exists.
 */
public class ShipRenderer {
    private final ModelLoader loader;
    private float animationTime;

    public ShipRenderer(ModelLoader loader) {
        this.loader = loader;
    }

    public void render(Ship ship) {
        String asset = loader.assetForLength(ship.getLength());
        if (asset == null) {
            renderBox(ship);
        }
    }

    private void renderBox(Ship ship) {
        // box dimensions scale with ship.getLength()
    }

    public void update(float tpf) {
        animationTime += tpf;
    }

    public void update(float tpf, boolean paused) {
        if (!paused) {
            update(tpf);
        }
    }
}
