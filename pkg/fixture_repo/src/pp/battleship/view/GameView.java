package pp.battleship.view;

/**
 * Top-level view composed of a board canvas and a heads-up status line.
 */
public class GameView {
    /**
     * Screen-space rectangle used for board layout.
     */
    public static class Viewport {
        final int width;
        final int height;

        Viewport(int width, int height) {
            this.width = width;
            this.height = height;
        }

        int area() {
            return width * height;
        }
    }

    private Viewport viewport = new Viewport(800, 600);
    private String status = "";

    public void refresh() {
        // redraw happens in the engine's render callback
    }

    public void setStatus(String status) {
        this.status = status;
    }

    public Viewport getViewport() {
        return viewport;
    }

    public void resize(int width, int height) {
        viewport = new Viewport(width, height);
    }
}
